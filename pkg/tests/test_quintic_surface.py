import math

import pytest

from relgw.cohomology import curve
from relgw.invariants import Species
from relgw.quintic_surface import (EXCLUSIONS, SW_EXPECTED, assemble_final, build_section33_system,
                                   candidate_configurations, default_data, multiplicities, prune, report,
                                   shape_of, solve_section33)

W = curve(3)


@pytest.fixture(scope="module")
def pipeline():
    system = build_section33_system()
    sol = solve_section33(system)
    return system, sol, assemble_final(sol, system)


def _by_shape(values, space, g=None):
    out = {}
    for k, v in values.items():
        if k.space == space and (g is None or k.g == g):
            out.setdefault(shape_of(k.nu, W), set()).add(v)
    return out


def test_final_value(pipeline):
    _, _, final = pipeline
    assert final["result"] == -1
    assert final["result"] == SW_EXPECTED == final["seiberg_witten"]


def test_k3_pair_values(pipeline):
    _, sol, _ = pipeline
    got = _by_shape(sol.values, "S4/C4", 3)
    assert got == {"mu1": {-1}, "mu2": {1}, "mu3": {-1}}


def test_genus4_values_vanish(pipeline):
    system, sol, _ = pipeline
    assert set().union(*_by_shape(sol.values, "S4/C4", 4).values()) == {0}
    p4 = {system.oracles.lookup(k).value for mu, k in system.p_keys.items() if mu.size == 4 and k.g == 4}
    assert p4 == {0}


def test_rows(pipeline):
    _, _, final = pipeline
    rows = {r["shape"]: r for r in final["rows"]}
    assert [rows[s]["P/D0"] for s in ("mu1", "mu2", "mu3")] == [7, -3, 1]
    assert [rows[s]["B/C4"] for s in ("mu1", "mu2", "mu3")] == [1, 1, 1]
    assert [rows[s]["multiplicity"] for s in ("mu1", "mu2", "mu3")] == [1, 3, 3]
    assert [rows[s]["contribution"] for s in ("mu1", "mu2", "mu3")] == [-8, 12, -6]
    assert final["whole_b"] == 0
    assert 1 + sum(r["contribution"] for r in final["rows"]) == -1


def test_b_absolute_is_one(pipeline):
    system, _, _ = pipeline
    entry = system.oracles.lookup("B:absolute")
    assert entry.value == 1


def test_no_printed_coefficient_diagnostics(pipeline):
    system, _, _ = pipeline
    assert system.diagnostics == []


def test_multiplicities_from_labelings():
    keep, _ = prune(candidate_configurations(W), W)
    m = multiplicities(keep, W)
    # one dual pair out of three for mu2, two out of three for mu3
    assert m["mu1"] == 1
    assert m["mu2"] == math.comb(3, 1)
    assert m["mu3"] == math.comb(3, 2)


def test_filter_counts():
    configs = candidate_configurations(W)
    keep, removed = prune(configs, W)
    assert len(keep) == 19
    assert len(keep) + sum(len(v) for v in removed.values()) == len(configs)
    assert {r.name for r in EXCLUSIONS} == set(removed)
    assert all(r.provenance in ("computed", "imported") for r in EXCLUSIONS)
    assert len(removed["linear-system-H"]) == 2
    assert len(removed["beta2-monodromy"]) == 1


def test_unknown_filter_rejected():
    with pytest.raises(ValueError):
        prune(candidate_configurations(W), W, disabled=["nope"])


@pytest.mark.parametrize("name", [r.name for r in EXCLUSIONS])
def test_disabling_a_filter_keeps_the_value(name):
    system = build_section33_system(disabled_filters=[name])
    sol = solve_section33(system)
    assert sol[system.target] == -1
    assert assemble_final(sol, system)["result"] == -1


def test_alternate_p_absolute_mode():
    data = default_data({"mu1": 8, "mu2": 4, "mu3": 2})
    assert data.mode == "p-absolute"
    system = build_section33_system(data)
    sol = solve_section33(system)
    got = _by_shape(sol.values, "P/D0", 3)
    assert got == {"mu1": {7}, "mu2": {-3}, "mu3": {1}}
    assert assemble_final(sol, system)["result"] == -1


def test_alternate_mode_propagates_other_inputs():
    system = build_section33_system(default_data({"mu1": 9, "mu2": 4, "mu3": 2}))
    sol = solve_section33(system)
    final = assemble_final(sol, system)
    rows = {r["shape"]: r for r in final["rows"]}
    # one more unit in P(mu1) shifts the relative values to 8, -4, 2
    assert [rows[s]["P/D0"] for s in ("mu1", "mu2", "mu3")] == [8, -4, 2]
    assert final["result"] == 1 + (-1 - 8) + 3 * (1 + 4) + 3 * (-1 - 2)


def test_equations_have_expected_species(pipeline):
    system, _, _ = pipeline
    species = {e.principal.species for e in system.equations}
    assert species == {Species.RELATIVE_PAIR, Species.ABSOLUTE}
    assert system.target.g == 6 and system.target.space == "S5"


def test_report_ends_with_result():
    text = report()
    assert text.rstrip().splitlines()[-1] == "result = -1"
    assert "[imported]" in text and "[computed]" in text
