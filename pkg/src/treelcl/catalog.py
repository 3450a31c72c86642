"""A few standard problems, handy for demos and tests."""

from __future__ import annotations

import itertools

from .problem import RootedProblem, UnrootedProblem


def proper_coloring(delta: int, colors: int, names=None) -> RootedProblem:
    """Every internal node differs in color from all of its children."""
    labels = tuple(names) if names else tuple(str(i + 1) for i in range(colors))
    cons = []
    for parent in range(colors):
        others = [c for c in range(colors) if c != parent]
        for kids in itertools.combinations_with_replacement(others, delta):
            cons.append((parent, kids))
    return RootedProblem(delta, labels, tuple(cons))


def two_coloring_path() -> RootedProblem:
    return proper_coloring(1, 2, names=("W", "B"))


def three_coloring_path() -> RootedProblem:
    return proper_coloring(1, 3)


def two_coloring_binary() -> RootedProblem:
    return proper_coloring(2, 2, names=("W", "B"))


def single_label(delta: int = 2) -> RootedProblem:
    return RootedProblem(delta, ("a",), ((0, (0,) * delta),))


def empty_problem(delta: int = 2) -> RootedProblem:
    return RootedProblem(delta, ("a",), ())


def bridged_coloring() -> RootedProblem:
    """Depth 2: a flexible component {a, b, x} whose bridge label x needs z1 from outside.

    Trimming the component drops x and leaves the inflexible 2-coloring {a, b}.
    """
    labels = ("a", "b", "x", "z1", "z2")
    a, b, x, z1, z2 = range(5)
    cons = ((a, (b, b)), (b, (a, a)), (a, (b, x)), (b, (a, x)), (x, (a, z1)), (z1, (z2, z2)), (z2, (z1, z1)))
    return RootedProblem(2, labels, cons)


def sinkless_orientation(delta: int = 3) -> UnrootedProblem:
    """Half-edge label O marks an outgoing edge; each full-degree node needs one."""
    labels = ("I", "O")
    nodes = [c for c in itertools.combinations_with_replacement(range(2), delta) if 1 in c]
    return UnrootedProblem(delta, labels, tuple(nodes), ((0, 1),))


CATALOG = {
    "two-coloring-path": two_coloring_path,
    "three-coloring-path": three_coloring_path,
    "two-coloring-binary": two_coloring_binary,
    "single-label": single_label,
    "empty": empty_problem,
    "bridged-coloring": bridged_coloring,
    "sinkless-orientation": sinkless_orientation,
}
