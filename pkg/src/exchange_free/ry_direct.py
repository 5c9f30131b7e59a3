"""Direct Ry preparation from a single run with a switched blocking schedule.

Bob leaves the channel open for the first M-k outer cycles and blocks for the
last k. Alice attenuates her outer arm by cos(pi/2N)^N every outer cycle so the
H arm loses exactly what the blocked inner chain loses, and the post-selected
output is cos(k pi/2M)|H> + sin(k pi/2M)|V> for any N.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .gates import PAULI_X, PAULI_Z, PolState
from .interferometer import BlockSchedule, CycleConfig, LossLedger, outer_run


@dataclass(frozen=True)
class RyDirectConfig:
    cycle: CycleConfig
    k: int

    def __post_init__(self):
        if int(self.k) != self.k or not 0 <= self.k <= self.cycle.outer:
            raise ValueError(f"k must be an integer in [0, {self.cycle.outer}], got {self.k!r}")

    @property
    def angle(self) -> float:
        """Ry angle enacted: k pi / M."""
        return self.k * math.pi / self.cycle.outer


def attenuation(cycle: CycleConfig) -> float:
    n = cycle.inner
    return math.cos(math.pi / (2 * n)) ** n


def closed_form_amplitude(cfg: RyDirectConfig) -> tuple[float, float]:
    """(H, V) amplitudes before the final PBS."""
    m, n, k = cfg.cycle.outer, cfg.cycle.inner, cfg.k
    scale = math.cos(math.pi / (2 * n)) ** (m * n) * math.cos(math.pi / (2 * m)) ** (m - k)
    half = k * math.pi / (2 * m)
    return scale * math.cos(half), scale * math.sin(half)


def _run(state: PolState, cfg: RyDirectConfig, ledger: LossLedger) -> PolState:
    m = cfg.cycle.outer
    sched = BlockSchedule.per_outer(cfg.cycle, [i >= m - cfg.k for i in range(m)])
    return outer_run(state, cfg.cycle, sched, ledger, outer_arm_factor=attenuation(cfg.cycle))


def run_ry_direct(cfg: RyDirectConfig, ledger: LossLedger | None = None) -> tuple[PolState, float]:
    """Post-selected output for an |H> input, and its survival probability."""
    raw = _run(PolState.h(), cfg, LossLedger() if ledger is None else ledger)
    return raw.normalized(), raw.norm_sq()


def run_ry_direct_arbitrary(state: PolState, cfg: RyDirectConfig) -> tuple[PolState, float]:
    """ry(k pi / M) on an arbitrary input, heralded by a 50:50 recombination.

    The V component is flipped to H, rotated, then phase-flipped and
    polarisation-flipped so that it becomes ry|V>. Both branches meet at a
    50:50 beamsplitter; the returned state is the one in the successful port
    and the probability includes the 1/2 from that port.
    """
    in_norm = state.norm_sq()
    if in_norm == 0:
        raise ValueError("input state has zero norm")
    h_branch = _run(state.h_part(), cfg, LossLedger())
    v_in = state.v_part().apply(PAULI_X)
    v_branch = _run(v_in, cfg, LossLedger()).apply(PAULI_Z).apply(PAULI_X)
    port = (h_branch + v_branch).scale(1 / math.sqrt(2))
    return port.normalized(), port.norm_sq() / in_norm


def expected_runs(success_prob: float) -> float:
    """Mean number of attempts until the first success."""
    return math.inf if success_prob <= 0 else 1.0 / success_prob
