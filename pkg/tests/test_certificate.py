import json

import pytest
from hypothesis import given, settings

from strategies import rooted_problems
from treelcl.catalog import proper_coloring, single_label, three_coloring_path, two_coloring_path
from treelcl.certificate import (
    BudgetExceeded,
    Certificate,
    CertificateNotFound,
    certificate_from_dict,
    search_certificate,
    verify_certificate,
)


def _conditions(verdict):
    return {c for c, _ in verdict.violations}


def test_three_coloring_certificate():
    p = three_coloring_path()
    c = search_certificate(p)
    assert isinstance(c, Certificate)
    assert (c.sigma_t, c.d1, c.d2) == ((0,), 2, 3)
    assert verify_certificate(p, c).ok


def test_single_label_leaf_patterns():
    c = search_certificate(single_label(2))
    assert len(c.leaf_pattern1) == 4 and len(c.leaf_pattern2) == 8


def test_json_roundtrip():
    p = proper_coloring(2, 3)
    c = search_certificate(p)
    text = c.to_json(p.labels)
    back = certificate_from_dict(json.loads(text), p)
    assert back == c
    assert verify_certificate(p, back).ok


def test_tampering_is_detected():
    p = three_coloring_path()
    c = search_certificate(p)
    same = Certificate(c.sigma_t, 2, 4, c.trees1, c.trees2)
    assert 1 in _conditions(verify_certificate(p, same))
    shallow = Certificate(c.sigma_t, c.d1, c.d2, c.trees1, c.trees1)
    assert 2 in _conditions(verify_certificate(p, shallow))
    # relabel the root so the parent/child constraint breaks
    label, kids = c.trees1[0]
    broken = ((kids[0][0], kids),)
    assert {3, 5} <= _conditions(verify_certificate(p, Certificate(c.sigma_t, c.d1, c.d2, broken, c.trees2)))


def test_leaf_outside_sigma_t_is_detected():
    p = single_label(1)
    tree = (0, ((0, ((0, ()),)),))
    ok = Certificate((0,), 2, 3, (tree,), ((0, (tree,)),))
    assert verify_certificate(p, ok).ok
    p3 = three_coloring_path()
    t1 = (0, ((1, ((2, ()),)),))
    assert 4 in _conditions(verify_certificate(p3, Certificate((0,), 2, 3, (t1,), (t1,))))


def test_two_coloring_not_found():
    for md in range(2, 7):
        r = search_certificate(two_coloring_path(), max_depth=md)
        assert isinstance(r, CertificateNotFound)
        assert r.to_dict()["status"] == "NOT_FOUND"


def test_budget():
    with pytest.raises(BudgetExceeded):
        search_certificate(proper_coloring(2, 4), expansion_cap=3)


def test_argument_checks():
    with pytest.raises(ValueError):
        search_certificate(single_label(), max_depth=1)
    with pytest.raises(ValueError):
        search_certificate(single_label(), min_depth=0)


def test_min_depth_one_gives_smaller_pair():
    c = search_certificate(single_label(), min_depth=1)
    assert (c.d1, c.d2) == (1, 2)


@settings(max_examples=100, deadline=None)
@given(rooted_problems(max_labels=3, max_delta=2))
def test_found_certificates_verify_and_are_deterministic(p):
    a = search_certificate(p, max_depth=4)
    assert a == search_certificate(p, max_depth=4)
    if isinstance(a, Certificate):
        assert verify_certificate(p, a).ok
