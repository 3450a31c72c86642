"""Classify every problem in demos/problems and print depth, class and witness."""

from pathlib import Path

from treelcl.depth import classify, pruning_constant
from treelcl.problem import load_problem

here = Path(__file__).parent / "problems"

for path in sorted(here.glob("*.json")):
    p = load_problem(path)
    rep = classify(p).to_dict()
    print(f"{path.stem:22s} depth={rep['depth']:>3s}  {rep['class']:16s} prune={pruning_constant(p)}")
    if rep["witness_good_sequence"]:
        print("    witness:", " > ".join("{" + ",".join(map(str, s)) + "}" for s in rep["witness_good_sequence"]))
