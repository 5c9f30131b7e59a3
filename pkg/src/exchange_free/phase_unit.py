"""The Phase Unit: repeated runs with a phase plate on the recirculation path.

Bob leaves the channel open for ``k`` runs, during which the photon stays H and
picks up pi/L per round trip through the phase plate, then blocks for one run,
which flips it to V so it leaves the unit. The exit run index is the time bin.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Iterable, Literal, Optional

from .gates import PAULI_X, PolState
from .interferometer import CycleConfig, LossLedger, outer_run

Mode = Literal["phase", "dit", "delay_only"]
MODES = ("phase", "dit", "delay_only")


@dataclass(frozen=True)
class PhaseUnitConfig:
    """Configuration of one Phase Unit.

    ``input_pol="V"`` is the variant with the flip plate moved to the input: a
    V photon is flipped to H on entry and leaves as V. ``phase_sign`` flips the
    phase plate's tilt so the unit applies e^{-ik pi/L} instead.
    """

    cycle: CycleConfig
    runs_max: int
    k: int
    mode: Mode = "phase"
    input_pol: Literal["H", "V"] = "H"
    phase_sign: int = 1

    def __post_init__(self):
        if int(self.runs_max) != self.runs_max or self.runs_max < 1:
            raise ValueError(f"runs_max must be a positive integer, got {self.runs_max!r}")
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        hi = self.runs_max - 1 if self.mode == "dit" else self.runs_max
        if int(self.k) != self.k or not 0 <= self.k <= hi:
            raise ValueError(f"k must be an integer in [0, {hi}] for mode {self.mode!r}, got {self.k!r}")
        if self.input_pol not in ("H", "V"):
            raise ValueError(f"input_pol must be 'H' or 'V', got {self.input_pol!r}")
        if self.phase_sign not in (1, -1):
            raise ValueError("phase_sign must be +1 or -1")

    @property
    def total_runs(self) -> int:
        # dit mode: k open runs then blocked for the remaining L - k; otherwise
        # k open, one blocked, then open runs until the L+1 budget is spent
        return self.runs_max if self.mode == "dit" else self.runs_max + 1

    @property
    def phase(self) -> float:
        """Phase the unit imprints on its component."""
        if self.mode != "phase":
            return 0.0
        return self.phase_sign * self.k * math.pi / self.runs_max


@dataclass
class PhaseUnitResult:
    out_state: PolState
    survival_prob: float
    exit_bin: Optional[int]
    ledger: LossLedger = field(repr=False)
    exit_state: PolState = field(repr=False, default_factory=lambda: PolState(0.0, 0.0))


def _blocks(cfg: PhaseUnitConfig, run: int) -> bool:
    if cfg.mode == "dit":
        return run >= cfg.k
    return run == cfg.k


def run_phase_unit(cfg: PhaseUnitConfig, state: Optional[PolState] = None) -> PhaseUnitResult:
    """Send one polarisation component through the unit.

    ``state`` defaults to |H> (or |V> for the V variant) and must be purely
    that polarisation. ``exit_state`` is the unnormalised amplitude leaving in
    bin k; ``out_state`` is it renormalised (post-selection).
    """
    if state is None:
        state = PolState.h() if cfg.input_pol == "H" else PolState.v()
    stray = state.amp_v if cfg.input_pol == "H" else state.amp_h
    if stray != 0:
        raise ValueError(f"Phase Unit for {cfg.input_pol} input received the other polarisation")
    in_norm = state.norm_sq()
    if cfg.input_pol == "V":
        state = state.apply(PAULI_X)

    plate = 0.0 if cfg.mode != "phase" else cfg.phase_sign * math.pi / cfg.runs_max
    ledger = LossLedger()
    # the recirculating amplitude is kept phase-free; the plate's accumulated
    # phase is attached on the way out, so survival cannot depend on L
    exit_amp, exit_tag, exit_phase = 0j, 0j, 1.0
    for run in range(cfg.total_runs):
        ledger.run = run
        state = outer_run(state, cfg.cycle, _blocks(cfg, run), ledger)
        phase = cmath.exp(1j * plate * run)
        # final PBS: V leaves the unit through the flip plate, H recirculates
        if run == cfg.k:
            exit_amp, exit_tag, exit_phase = state.amp_v, state.tag_v, phase
        else:
            ledger.discard(-1, state.amp_v * phase)
        if run == cfg.total_runs - 1:
            ledger.discard(-1, state.amp_h * cmath.exp(1j * plate * (run + 1)))
            break
        state = state.h_part()

    survival = abs(exit_amp) ** 2 / in_norm if in_norm > 0 else 0.0
    exit_amp, exit_tag = exit_amp * exit_phase, exit_tag * exit_phase
    if cfg.input_pol == "H":
        exit_state = PolState(exit_amp, 0j, exit_tag, 0j)
    else:
        exit_state = PolState(0j, exit_amp, 0j, exit_tag)
    return PhaseUnitResult(
        out_state=exit_state.normalized(),
        survival_prob=survival,
        exit_bin=cfg.k if survival > 0 else None,
        ledger=ledger,
        exit_state=exit_state,
    )


def send_dit(cfg: PhaseUnitConfig) -> Optional[int]:
    """Exit time bin of a unit in dit mode; equals k."""
    if cfg.mode != "dit":
        raise ValueError("send_dit needs a dit-mode Phase Unit")
    return run_phase_unit(cfg).exit_bin


def survival_surface(
    grid: Iterable[tuple[int, int]],
    k: int,
    runs_max: Optional[int] = None,
    *,
    check_runs_max: Optional[int] = None,
    av_variant: bool = False,
) -> list[tuple[int, int, int, float]]:
    """Rows (M, N, k, survival) over ``grid``, in grid order.

    With ``check_runs_max`` every point is recomputed at a second L and the
    two survivals must agree to 1e-12.
    """
    grid = list(grid)
    if not grid:
        raise ValueError("grid is empty")
    runs_max = max(k, 1) if runs_max is None else runs_max
    rows = []
    for m, n in grid:
        cycle = CycleConfig(m, n, av_variant=av_variant)
        surv = run_phase_unit(PhaseUnitConfig(cycle, runs_max, k)).survival_prob
        if check_runs_max is not None:
            other = run_phase_unit(PhaseUnitConfig(cycle, check_runs_max, k)).survival_prob
            if abs(other - surv) > 1e-12:
                raise ArithmeticError(
                    f"survival depends on L at M={m}, N={n}: {surv!r} vs {other!r}"
                )
        rows.append((m, n, k, surv))
    return rows
