import json
import re
from pathlib import Path

import pytest

from relgw.schemes import (SchemeError, Space, blowup, blowup_dependencies, complete_intersection,
                           hypersurface, hypersurface_closure, hypersurface_step, is_known, projective,
                           quintic_scheme)

DATA = Path(__file__).parent / "data" / "quintic_arrows.json"
RULES = {"3": "Theorem-3", "2": "Theorem-2", "l": "Lemma-1"}


def _norm(name: str) -> str:
    """Transcription names to generated names: T1 = P3, S1 = P2, C_{a,b} = C(a,b)."""
    name = re.sub(r"C_\{(\d+),(\d+)\}", r"C(\1,\2)", name)
    name = re.sub(r"\bT1\b", "P3", name)
    return re.sub(r"\bS1\b", "P2", name)


def transcription():
    data = json.loads(DATA.read_text())
    arrows = [(_norm(s), RULES[r], tuple(_norm(t) for t in ts)) for s, r, ts in data["arrows"]]
    return arrows, [_norm(e) for e in data["endpoints"]]


def test_quintic_matches_transcription():
    arrows, _ = transcription()
    dag = quintic_scheme()
    got = [(a.source.name, a.rule, tuple(t.name for t in a.targets)) for a in dag.applications]
    assert len(arrows) == 16
    assert sorted(got) == sorted(arrows)
    nodes = {s for s, _, _ in arrows} | {t for _, _, ts in arrows for t in ts}
    edges = [(s, t) for s, _, ts in arrows for t in ts]
    assert len(dag.nodes) == len(nodes) == 26
    assert len(dag.edges) == len(edges) == 36


def test_quintic_endpoints():
    _, endpoints = transcription()
    dag = quintic_scheme()
    assert dag.endpoints() == endpoints
    assert set(dag.endpoints()) == {"P3", "P2", "S2", "S3", "S4", "C(1,2)", "C(2,3)", "C(3,4)", "C(4,5)"}


def test_quintic_structure():
    dag = quintic_scheme()
    assert dag.is_acyclic()
    names = {n.name for n in dag.nodes}
    assert {"T2*", "T3*", "T4*", "T5*"} <= names
    assert all(rule in ("Theorem-2", "Theorem-3", "Lemma-1") for _, rule, _ in dag.edges)
    assert quintic_scheme().to_text() == dag.to_text()
    assert quintic_scheme().to_dot() == dag.to_dot()


def test_sextic_surface_step():
    dag = hypersurface_closure(hypersurface(3, 5))
    assert set(dag.endpoints()) == {"P2", "S4", "C4", "P0"}
    assert dag.is_acyclic()


def test_t2_reaches_known_theories():
    dag = hypersurface_closure(hypersurface(4, 2))
    for n in dag.sinks():
        assert is_known(n.space) is not None, n.name


@pytest.mark.parametrize("r,d", [(3, d) for d in range(2, 7)] + [(4, d) for d in range(2, 6)])
def test_closure_terminates_with_decreasing_degree(r, d):
    dag = hypersurface_closure(hypersurface(r, d))
    assert dag.is_acyclic()
    for a in dag.applications:
        if a.rule == "degeneration-step":
            src = a.source.space.ambient
            for t in a.targets:
                amb = t.space.ambient
                if amb and amb[0] == src[0] and len(amb[1]) == 1:
                    assert amb[1][0] < src[1][0]


def test_hypersurface_step_rejects_low_degree():
    with pytest.raises(SchemeError):
        hypersurface_step(Space("S", (1,)))


def test_blowup_pairwise():
    app = blowup_dependencies(projective(3), [hypersurface(3, 4), hypersurface(3, 5)])
    assert app.source.name == "P3[4,5]"
    assert [t.name for t in app.targets] == ["P3", "S4", "C(4,5)"]
    assert app.rule == "Lemma-1"


def test_blowup_single_divisor():
    app = blowup_dependencies(projective(3), [hypersurface(3, 4)])
    assert {t.name for t in app.targets} == {"P3", "S4"}
    assert app.source.space == blowup(projective(3), hypersurface(3, 4))


def test_blowup_chain_length():
    divs = [hypersurface(5, d) for d in (2, 3, 4)]
    app = blowup_dependencies(projective(5), divs)
    assert len(app.targets) == len(divs) + 1
    assert app.targets[-1].space == complete_intersection(5, (2, 3, 4))


def test_blowup_errors():
    with pytest.raises(SchemeError):
        blowup_dependencies(projective(3), [])
    with pytest.raises(SchemeError):
        blowup_dependencies(projective(3), [hypersurface(3, 4), hypersurface(3, 5)], Z=hypersurface(3, 2))


def test_complete_intersection_names():
    assert complete_intersection(3, (5, 4)).name == "C(4,5)"
    assert complete_intersection(3, (1,)).name == "P2"
    assert complete_intersection(2, (4,)).name == "C4"
    assert complete_intersection(2, (2, 3)).name == "P0"
    with pytest.raises(SchemeError):
        complete_intersection(2, (1, 1, 1))
