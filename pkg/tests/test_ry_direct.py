import math

import numpy as np
import pytest

from exchange_free.gates import PolState, dist_up_to_global_phase, ry
from exchange_free.interferometer import CycleConfig, LossLedger
from exchange_free.ry_direct import (
    RyDirectConfig,
    closed_form_amplitude,
    expected_runs,
    run_ry_direct,
    run_ry_direct_arbitrary,
)


def survival_oracle(m, n, k):
    return math.cos(math.pi / (2 * n)) ** (2 * m * n) * math.cos(math.pi / (2 * m)) ** (2 * (m - k))


@pytest.mark.parametrize("m,n,k", [(2, 2, 1), (5, 3, 2), (10, 10, 7), (4, 20, 4), (7, 2, 3)])
def test_state_and_survival(m, n, k):
    out, surv = run_ry_direct(RyDirectConfig(CycleConfig(m, n), k))
    half = k * math.pi / (2 * m)
    assert np.allclose(out.vector, [math.cos(half), math.sin(half)], atol=1e-12)
    assert surv == pytest.approx(survival_oracle(m, n, k), abs=1e-12)
    assert out.tag_weight() <= 1e-12


def test_single_inner_cycle_attenuates_to_nothing():
    _, surv = run_ry_direct(RyDirectConfig(CycleConfig(4, 1), 2))
    assert surv < 1e-24


def test_closed_form_amplitude_agrees():
    cfg = RyDirectConfig(CycleConfig(6, 5), 4)
    h, v = closed_form_amplitude(cfg)
    _, surv = run_ry_direct(cfg)
    assert h**2 + v**2 == pytest.approx(surv, abs=1e-12)


def test_k0_and_km():
    out, _ = run_ry_direct(RyDirectConfig(CycleConfig(5, 5), 0))
    assert np.allclose(out.vector, [1, 0], atol=1e-12)
    out, _ = run_ry_direct(RyDirectConfig(CycleConfig(5, 5), 5))
    assert np.allclose(out.vector, [0, 1], atol=1e-12)


def test_probability_balance():
    ledger = LossLedger()
    out, surv = run_ry_direct(RyDirectConfig(CycleConfig(6, 7), 2), ledger)
    assert surv + ledger.total_lost_prob == pytest.approx(1, abs=1e-12)
    assert ledger.prob("attenuated") > 0


@pytest.mark.parametrize("psi", [PolState(0.6, 0.8j), PolState.v(), PolState(1, -1).normalized()])
def test_arbitrary_input(psi):
    cfg = RyDirectConfig(CycleConfig(5, 4), 3)
    out, prob = run_ry_direct_arbitrary(psi, cfg)
    expected = ry(cfg.angle) @ psi.vector
    assert dist_up_to_global_phase(out.vector, expected) < 1e-12
    assert 0 < prob <= 0.5


def test_invalid_k():
    with pytest.raises(ValueError):
        RyDirectConfig(CycleConfig(3, 3), 4)


def test_expected_runs_near_two_when_n_much_larger_than_m():
    m, k = 20, 10
    probs = [survival_oracle(m, n, k) for n in (10**3, 10**5, 10**7)]
    runs = [expected_runs(0.5 * p) for p in probs]
    assert runs[-1] == pytest.approx(2 / math.cos(math.pi / (2 * m)) ** (2 * (m - k)), rel=1e-3)
    assert runs == sorted(runs, reverse=True)
    # simulator agrees with the closed form at a simulable size
    _, surv = run_ry_direct(RyDirectConfig(CycleConfig(m, 2000), k))
    assert surv == pytest.approx(survival_oracle(m, 2000, k), abs=1e-12)
    assert expected_runs(0.5 * surv) < 2.2


def test_expected_runs_zero_probability():
    assert expected_runs(0.0) == math.inf
