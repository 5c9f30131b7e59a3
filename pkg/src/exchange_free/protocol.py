"""Arbitrary single-qubit unitaries from paired Phase Units.

A pair of Phase Units (one per polarisation arm) is an Rz rotator; wrapping a
rotator in quarter wave plates gives an Ry rotator. Three stages in ZYZ order
realise any unitary up to global phase, with Bob's "program" being the three
blocking counts.
"""
from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .gates import Op2, PolState, is_unitary, qwp, qwp_dagger, ry, rz
from .interferometer import CycleConfig
from .phase_unit import Mode, PhaseUnitConfig, PhaseUnitResult, run_phase_unit

GIMBAL_TOL = 1e-12


@dataclass(frozen=True)
class BobProgram:
    beta: int
    gamma: int
    delta: int
    resolution: int
    alpha_global: float = 0.0
    equalize: bool = False

    def __post_init__(self):
        if int(self.resolution) != self.resolution or self.resolution < 1:
            raise ValueError(f"resolution must be a positive integer, got {self.resolution!r}")
        for name in ("beta", "gamma", "delta"):
            k = getattr(self, name)
            if int(k) != k or not 0 <= k <= self.resolution:
                raise ValueError(f"{name} must be an integer in [0, {self.resolution}], got {k!r}")

    @property
    def angles(self) -> tuple[float, float, float]:
        step = 2 * math.pi / self.resolution
        return self.beta * step, self.gamma * step, self.delta * step

    @property
    def equalizer_k(self) -> int:
        return 3 * self.resolution - self.beta - self.gamma - self.delta

    def unitary(self) -> Op2:
        """The operator this program enacts, up to global phase."""
        b, g, d = self.angles
        return rz(b) @ ry(g) @ rz(d)

    def to_dict(self) -> dict:
        return {
            "beta": self.beta,
            "gamma": self.gamma,
            "delta": self.delta,
            "L": self.resolution,
            "equalize": self.equalize,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> BobProgram:
        return cls(
            beta=int(d["beta"]),
            gamma=int(d["gamma"]),
            delta=int(d["delta"]),
            resolution=int(d["L"]),
            equalize=bool(d.get("equalize", False)),
        )

    @classmethod
    def from_json(cls, text: str) -> BobProgram:
        return cls.from_dict(json.loads(text))


@dataclass
class ProtocolResult:
    out_state: PolState
    total_survival: float
    exit_bin_total: int
    per_stage: list[tuple[PhaseUnitResult, PhaseUnitResult]] = field(repr=False)
    stage_survivals: list[float] = field(default_factory=list)
    stage_bins: list[int] = field(default_factory=list)


def zyz_angles(u: Op2) -> tuple[float, float, float, float]:
    """(alpha, beta, gamma, delta) with u = e^{i alpha} rz(beta) ry(gamma) rz(delta).

    gamma lies in [0, pi]. At gamma in {0, pi} delta is fixed to 0.
    """
    u = np.asarray(u, dtype=complex)
    if not is_unitary(u):
        raise ValueError("matrix is not unitary")
    alpha = cmath.phase(np.linalg.det(u)) / 2
    su = u * cmath.exp(-1j * alpha)
    gamma = 2 * math.atan2(abs(su[1, 0]), abs(su[0, 0]))
    if abs(su[1, 0]) < GIMBAL_TOL:
        beta, delta = 2 * cmath.phase(su[1, 1]), 0.0
    elif abs(su[0, 0]) < GIMBAL_TOL:
        beta, delta = 2 * cmath.phase(su[1, 0]), 0.0
    else:
        plus = 2 * cmath.phase(su[1, 1])
        minus = 2 * cmath.phase(su[1, 0])
        beta, delta = (plus + minus) / 2, (plus - minus) / 2
    # rebuild and fix the residual sign so u = e^{i alpha} * product exactly
    prod = rz(beta) @ ry(gamma) @ rz(delta)
    idx = np.unravel_index(np.argmax(np.abs(prod)), prod.shape)
    alpha = cmath.phase(u[idx] / prod[idx])
    return alpha, beta, gamma, delta


def quantize_angle(theta: float, resolution: int) -> int:
    """Nearest multiple of 2 pi / L after mapping theta into [0, 2 pi); ties go down."""
    step = 2 * math.pi / resolution
    theta = theta % (2 * math.pi)
    k = math.ceil(theta / step - 0.5)
    return min(max(k, 0), resolution)


def compile_unitary(u: Op2, resolution: int, *, equalize: bool = False) -> BobProgram:
    alpha, beta, gamma, delta = zyz_angles(u)
    return BobProgram(
        beta=quantize_angle(beta, resolution),
        gamma=quantize_angle(gamma, resolution),
        delta=quantize_angle(delta, resolution),
        resolution=resolution,
        alpha_global=alpha,
        equalize=equalize,
    )


def operator_error_bound(resolution: int) -> float:
    """Loose bound on the distance between u and its quantized program."""
    return 3 * math.pi / resolution


def rz_rotator(
    state: PolState,
    k: int,
    runs_max: int,
    cycle: CycleConfig,
    *,
    mode: Mode = "phase",
) -> tuple[PolState, tuple[PhaseUnitResult, PhaseUnitResult]]:
    """rz(2 k pi / L) on ``state`` via two Phase Units, up to global phase.

    The H arm runs a unit with its plate tilted to give e^{-ik pi/L}, the V arm
    the V-variant giving e^{+ik pi/L}. The returned state is unnormalised: it
    carries the pair's survival amplitude.
    """
    h_cfg = PhaseUnitConfig(cycle, runs_max, k, mode=mode, input_pol="H", phase_sign=-1)
    v_cfg = PhaseUnitConfig(cycle, runs_max, k, mode=mode, input_pol="V", phase_sign=1)
    h_res = run_phase_unit(h_cfg, state.h_part())
    v_res = run_phase_unit(v_cfg, state.v_part())
    return h_res.exit_state + v_res.exit_state, (h_res, v_res)


def ry_rotator(
    state: PolState, k: int, runs_max: int, cycle: CycleConfig
) -> tuple[PolState, tuple[PhaseUnitResult, PhaseUnitResult]]:
    """ry(2 k pi / L) up to global phase: qwp_dagger, Rz rotator, then qwp."""
    mid, units = rz_rotator(state.apply(qwp_dagger()), k, runs_max, cycle)
    return mid.apply(qwp()), units


def run_protocol(state: PolState, prog: BobProgram, cycle: CycleConfig) -> ProtocolResult:
    """Apply rz(beta') ry(gamma') rz(delta') to ``state``: the delta stage runs first."""
    L = prog.resolution
    in_norm = state.norm_sq()
    if in_norm == 0:
        raise ValueError("input state has zero norm")
    current = state.scale(1 / math.sqrt(in_norm))
    stages: list[tuple[PhaseUnitResult, PhaseUnitResult]] = []
    survivals: list[float] = []
    bins: list[int] = []

    def record(out: PolState, units, k: int) -> PolState:
        # current is normalised, so the stage survival is the output norm;
        # renormalising between stages keeps long programs from underflowing
        survivals.append(out.norm_sq())
        stages.append(units)
        bins.append(k)
        return out.normalized()

    out, units = rz_rotator(current, prog.delta, L, cycle)
    current = record(out, units, prog.delta)
    out, units = ry_rotator(current, prog.gamma, L, cycle)
    current = record(out, units, prog.gamma)
    out, units = rz_rotator(current, prog.beta, L, cycle)
    current = record(out, units, prog.beta)
    if prog.equalize:
        out, units = rz_rotator(current, prog.equalizer_k, 3 * L, cycle, mode="delay_only")
        current = record(out, units, prog.equalizer_k)

    total = math.prod(survivals)
    return ProtocolResult(
        out_state=current,
        total_survival=total,
        exit_bin_total=sum(bins),
        per_stage=stages,
        stage_survivals=survivals,
        stage_bins=bins,
    )


def haar_unitary(rng: Optional[np.random.Generator] = None) -> Op2:
    """Haar-random 2x2 unitary via QR of a complex Ginibre matrix."""
    rng = np.random.default_rng() if rng is None else rng
    z = (rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))
