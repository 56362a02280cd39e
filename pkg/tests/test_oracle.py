import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from carrieralloc.carrier_solver import Participant, StageInput, solve_stage
from carrieralloc.errors import InvalidParameterError, TooManyParticipantsError
from carrieralloc.oracle import (grid_solve, kkt_check, project_capped_simplex,
                                 projected_gradient_solve, stage_objective)
from carrieralloc.utility import Logarithmic, Sigmoidal

from instances import random_stage_instance

S1, L3, L05 = Sigmoidal(3, 20), Logarithmic(3, 100), Logarithmic(0.5, 100)


def twin(u=L3, R=40.0):
    return StageInput(1, R, (Participant(1, u), Participant(2, u)))


def stage_one():
    return StageInput(1, 60.0, (Participant(1, S1), Participant(2, Sigmoidal(1, 30), 0, 30.0),
                                Participant(3, L3), Participant(4, L05, 0, 15.0)))


def test_grid_symmetry_and_single():
    g = grid_solve(twin(), 400)
    assert g.rates[1] == pytest.approx(20, abs=40 / 400)
    assert g.rates[2] == pytest.approx(20, abs=40 / 400)
    one = grid_solve(StageInput(1, 33.0, (Participant(1, S1),)), 50)
    assert one.rates[1] == 33.0


def test_grid_matches_solver_on_restricted_stage_one():
    inp = StageInput(1, 15.0, (Participant(1, S1), Participant(3, L3)))
    g = grid_solve(inp, 400)
    s = solve_stage(inp, 1e-9)
    for uid in (1, 3):
        assert g.rates[uid] == pytest.approx(s.rates[uid], abs=15 / 400)


def test_grid_limits():
    parts = tuple(Participant(i, L3) for i in range(4))
    with pytest.raises(TooManyParticipantsError):
        grid_solve(StageInput(1, 10.0, parts))
    with pytest.raises(InvalidParameterError):
        grid_solve(twin(), 49)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([50, 100, 200]))
def test_grid_refinement_never_worse(seed, steps):
    inp = random_stage_instance(np.random.default_rng(seed))
    assert grid_solve(inp, 2 * steps).objective >= grid_solve(inp, steps).objective


def test_pg_symmetry():
    for u in (L3, S1):
        r = projected_gradient_solve(twin(u), iters=10000, step=0.1)
        assert r.rates[1] == pytest.approx(20, abs=1e-3)
        assert r.rates[2] == pytest.approx(20, abs=1e-3)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_pg_history_non_decreasing(seed):
    inp = random_stage_instance(np.random.default_rng(seed))
    hist = projected_gradient_solve(inp).meta["history"]
    assert all(b >= a - 1e-9 for a, b in zip(hist, hist[1:]))


def test_pg_matches_solver_on_stage_one():
    inp = stage_one()
    pg = projected_gradient_solve(inp)
    # at 1e-3 the unspent slack (up to 0.06) times a marginal near 3 already
    # moves the objective by ~0.1, so the comparison runs at a tight tolerance
    s = solve_stage(inp, 1e-6)
    assert stage_objective(inp, [s.increments[q.user_id] for q in inp.participants]) == \
        pytest.approx(pg.objective, abs=1e-3)
    for q in inp.participants:
        assert pg.rates[q.user_id] >= q.reservation


def test_pg_bad_arguments():
    with pytest.raises(InvalidParameterError):
        projected_gradient_solve(twin(), iters=0)
    with pytest.raises(InvalidParameterError):
        projected_gradient_solve(twin(), step=0)


def test_projection():
    x = project_capped_simplex(np.array([5.0, -1.0, 0.2]), np.array([0.0, 0.5, 0.0]), 3.0)
    assert x.sum() == pytest.approx(3.0)
    assert np.all(x >= [0.0, 0.5, 0.0])
    # a point already on the set is a fixed point
    y = np.array([1.0, 1.5, 0.5])
    assert np.allclose(project_capped_simplex(y, np.array([0.0, 0.5, 0.0]), 3.0), y)


def test_kkt_on_solver_output():
    for inp in (stage_one(), twin(), twin(S1)):
        s = solve_stage(inp, 1e-3)
        k = kkt_check(inp, s.rates, s.shadow_price)
        assert k.stationarity <= 1e-3 and k.slackness <= 1e-3
        assert k.budget_residual <= 1e-3 * inp.capacity
        assert k.passes(1e-3, 1e-3 * inp.capacity)


def test_kkt_budget_residual_is_exact():
    inp = twin()
    k = kkt_check(inp, {1: 19.0, 2: 20.5}, 0.05)
    assert k.budget_residual == 0.5
    bad = kkt_check(StageInput(1, 10.0, (Participant(1, L3, 0, 4.0),)), {1: 3.0}, 0.1)
    assert bad.reservation_violation == 1.0
    assert not bad.passes()
    with pytest.raises(InvalidParameterError):
        kkt_check(inp, {1: 20.0, 2: 20.0}, 0.0)


def test_kkt_on_coarse_grid_scales_with_spacing():
    inp = StageInput(1, 40.0, (Participant(1, L3), Participant(2, L05, 2.0)))
    for steps in (50, 100, 400, 1600):
        g = grid_solve(inp, steps)
        h = inp.capacity / steps
        m = [q.utility.marginal_scalar(q.base + g.increments[q.user_id]) for q in inp.participants]
        p = float(np.mean(m))
        k = kkt_check(inp, g.rates, p)
        # curvature of the marginal over one grid cell bounds the mismatch
        curv = max(abs(q.utility.marginal_scalar(q.base + g.increments[q.user_id] + h)
                       - q.utility.marginal_scalar(q.base + g.increments[q.user_id])) for q in inp.participants)
        assert k.stationarity <= curv / p + 1e-12
