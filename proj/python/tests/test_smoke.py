import os
import pathlib

import pytest

import p2pmarket as pm

DATA = pathlib.Path(os.environ.get("P2P_TEST_DATA_DIR", pathlib.Path(__file__).resolve().parents[2] / "tests" / "data"))
FIXTURE = DATA / "fixture_3x3.json"


def test_optimal_assignment_and_coalitions():
    m = pm.AssignmentMatrix([[5, 3], [4, 6]])
    match = pm.solve_optimal_assignment(m)
    assert match.pairs == [(0, 0), (1, 1)]
    assert match.total_value == 11
    assert pm.brute_force_assignment(m).total_value == 11
    assert pm.coalition_value(m, [0], [1]) == 3
    assert pm.coalition_value(m, [], [0, 1]) == 0


def test_tau_sits_in_the_core():
    game = pm.AssignmentGame(pm.AssignmentMatrix([[5, 3], [4, 6]]))
    tau = pm.tau_value(game)
    assert tau.provenance == pm.Provenance.TAU
    assert tau.buyer_payoffs[1] == pytest.approx(3.0)
    assert pm.is_core_member(game, tau).member
    buyer_opt, seller_opt = pm.extreme_allocations(game)
    assert pm.is_core_member(game, buyer_opt)
    assert pm.is_core_member(game, seller_opt)
    bad = pm.extreme_allocations(pm.AssignmentGame(pm.AssignmentMatrix([[1]])))[0]
    with pytest.raises(ValueError):
        pm.is_core_member(game, bad)


def test_negotiation_reaches_tau():
    game = pm.AssignmentGame(pm.AssignmentMatrix([[5, 3], [4, 6]]))
    bounds = pm.pair_bounds(game, (1, 1))
    result = pm.run_negotiation(bounds, pm.make_weight_family(0.2, 5, 7))
    assert result.converged
    assert result.payoff[0] == pytest.approx(bounds.buyer_mid, abs=1e-8)
    dist = result.dist_to_tau
    assert all(b <= a + 1e-12 for a, b in zip(dist, dist[1:]))
    with pytest.raises(ValueError):
        pm.make_weight_family(0.0, 5, 1)


def test_instance_round_trip_and_validation():
    inst = pm.load_instance(FIXTURE)
    assert [b.id for b in inst.buyers] == ["B1", "B2", "B3"]
    assert pm.validate_instance(inst) == []
    again = pm.parse_instance(inst.to_json())
    assert again.to_json() == inst.to_json()
    inst.sellers[0].ask_price = 0.5
    assert any("ask" in v.message for v in pm.validate_instance(inst))
    with pytest.raises(pm.ParseError):
        pm.parse_instance('{"tariff": {}, "bogus": 1}')


def test_pipeline_is_deterministic(tmp_path):
    codes = []
    for run in ("a", "b"):
        code, diagnostics, files = pm.run_pipeline(FIXTURE, tmp_path / run, seed=5)
        codes.append(code)
        assert diagnostics == []
        assert len(files) == 6
    assert codes == [0, 0]
    for name in ("matches.json", "trajectory.csv", "baseline.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    code, _, _ = pm.run_pipeline(FIXTURE, tmp_path / "c", stage="negotiate", max_iters=1, tol=1e-15)
    assert code == 3
