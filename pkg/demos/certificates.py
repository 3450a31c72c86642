"""Search, verify and tamper with coprime certificates."""

from treelcl.catalog import proper_coloring, three_coloring_path, two_coloring_path
from treelcl.certificate import Certificate, search_certificate, verify_certificate

p = three_coloring_path()
cert = search_certificate(p)
print("3-coloring on paths:", cert.sigma_t, "depths", (cert.d1, cert.d2))
print("  verify:", verify_certificate(p, cert).to_dict()["verdict"])

# equal depths are not coprime
bad = Certificate(cert.sigma_t, cert.d1, cert.d1, cert.trees1, cert.trees1)
print("  tampered:", verify_certificate(p, bad).violations[:2])

# 2-coloring only admits even depth differences, so no pair is coprime
print("2-coloring:", search_certificate(two_coloring_path(), max_depth=6).to_dict()["status"])

q = proper_coloring(2, 3)
c = search_certificate(q)
print("3-coloring of binary trees:", c.sigma_t, (c.d1, c.d2), len(c.leaf_pattern1), len(c.leaf_pattern2))
