"""Step simulation of one run of the nested (outer x inner) interferometer.

A run is M outer cycles. Each outer cycle rotates the photon by ry(pi/M), sends
its V component through a chain of N inner cycles, and recombines. Each inner
cycle rotates by ry(pi/N) and sends the H component across to Bob, who either
absorbs it (block) or reflects it back (no block). After the chain, any H
component (which has necessarily been to Bob) is dumped towards detector D_A.

Lost amplitude is moved into a :class:`LossLedger` rather than kept in an
enlarged state space.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence, Union

from .gates import PolState


@dataclass(frozen=True)
class CycleConfig:
    """Outer/inner cycle counts for a run.

    ``av_variant`` doubles the inner chain to 2N cycles; in that mode "not
    blocking" means Bob blocks only the N-th inner cycle. ``hwp_offset`` is an
    angle error added to every inner half wave plate, used only to model the
    imperfections the doubled chain is meant to suppress.
    """

    outer: int
    inner: int
    av_variant: bool = False
    hwp_offset: float = 0.0

    def __post_init__(self):
        if int(self.outer) != self.outer or self.outer < 1:
            raise ValueError(f"outer cycle count must be a positive integer, got {self.outer!r}")
        if int(self.inner) != self.inner or self.inner < 1:
            raise ValueError(f"inner cycle count must be a positive integer, got {self.inner!r}")
        if not math.isfinite(self.hwp_offset):
            raise ValueError("hwp_offset must be finite")

    @property
    def chain_length(self) -> int:
        return 2 * self.inner if self.av_variant else self.inner

    @property
    def run_length(self) -> int:
        return self.outer * self.chain_length


@dataclass(frozen=True)
class BlockSchedule:
    """Bob's per-inner-cycle choices for one run; True means block."""

    decisions: tuple[bool, ...]

    @classmethod
    def block_all(cls, cfg: CycleConfig) -> BlockSchedule:
        return cls((True,) * cfg.run_length)

    @classmethod
    def block_none(cls, cfg: CycleConfig) -> BlockSchedule:
        """Not blocking. In the doubled-chain variant this blocks the N-th inner cycle."""
        if not cfg.av_variant:
            return cls((False,) * cfg.run_length)
        chain = tuple(i == cfg.inner - 1 for i in range(cfg.chain_length))
        return cls(chain * cfg.outer)

    @classmethod
    def uniform(cls, cfg: CycleConfig, blocking: bool) -> BlockSchedule:
        return cls.block_all(cfg) if blocking else cls.block_none(cfg)

    @classmethod
    def per_outer(cls, cfg: CycleConfig, blocking: Sequence[bool]) -> BlockSchedule:
        """One uniform decision per outer cycle."""
        if len(blocking) != cfg.outer:
            raise ValueError(f"need {cfg.outer} outer decisions, got {len(blocking)}")
        blocked = cls.block_all(cfg).decisions[: cfg.chain_length]
        free = cls.block_none(cfg).decisions[: cfg.chain_length]
        out: list[bool] = []
        for b in blocking:
            out.extend(blocked if b else free)
        return cls(tuple(out))

    def __len__(self) -> int:
        return len(self.decisions)


class LossEvent(NamedTuple):
    run: int
    cycle: int
    amplitude: complex


@dataclass
class LossLedger:
    """Amplitude removed from the surviving photon, by destination.

    ``cycle`` indexes inner cycles within a run (D_A and D_B) or outer cycles
    (attenuation). ``discarded`` collects amplitude the enclosing device drops
    or routes to an unwanted exit (handled by callers such as the Phase Unit).
    """

    lost_da: list[LossEvent] = field(default_factory=list)
    lost_db: list[LossEvent] = field(default_factory=list)
    attenuated: list[LossEvent] = field(default_factory=list)
    discarded: list[LossEvent] = field(default_factory=list)
    total_lost_prob: float = 0.0
    run: int = 0

    def _record(self, bucket: list[LossEvent], cycle: int, amp: complex) -> None:
        if amp == 0:
            return
        bucket.append(LossEvent(self.run, cycle, amp))
        self.total_lost_prob += abs(amp) ** 2

    def to_da(self, cycle: int, amp: complex) -> None:
        self._record(self.lost_da, cycle, amp)

    def to_db(self, cycle: int, amp: complex) -> None:
        self._record(self.lost_db, cycle, amp)

    def attenuate(self, cycle: int, amp: complex) -> None:
        self._record(self.attenuated, cycle, amp)

    def discard(self, cycle: int, amp: complex) -> None:
        self._record(self.discarded, cycle, amp)

    def prob(self, bucket: str) -> float:
        return sum(abs(e.amplitude) ** 2 for e in getattr(self, bucket))


Policy = Union[bool, BlockSchedule]


def _schedule(cfg: CycleConfig, policy: Policy) -> tuple[bool, ...]:
    if isinstance(policy, BlockSchedule):
        sched = policy
    else:
        sched = BlockSchedule.uniform(cfg, bool(policy))
    if len(sched) != cfg.run_length:
        raise ValueError(f"schedule has {len(sched)} decisions, run needs {cfg.run_length}")
    return sched.decisions


def inner_chain(
    state: PolState,
    cfg: CycleConfig,
    decisions: Sequence[bool],
    ledger: LossLedger,
    *,
    exit_pbs: bool = True,
    cycle_offset: int = 0,
) -> PolState:
    """Run the inner-interferometer chain on ``state``.

    Each inner cycle applies ry(pi/N + offset) and then the crossing to Bob.
    With ``exit_pbs=False`` the state is returned as it arrives at the chain's
    exit beamsplitter, H component and all.

    Tagging: a reflected crossing tags the whole H amplitude. Paths through
    Bob and paths that stayed home interfere inside the chain, so whatever V
    amplitude leaves a chain in which Bob returned anything is counted as
    tagged in full.
    """
    if len(decisions) != cfg.chain_length:
        raise ValueError(f"chain needs {cfg.chain_length} decisions, got {len(decisions)}")
    theta = math.pi / cfg.inner + cfg.hwp_offset
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    h, v = complex(state.amp_h), complex(state.amp_v)
    th, tv = complex(state.tag_h), complex(state.tag_v)
    returned = False
    for j, blocked in enumerate(decisions):
        h, v = c * h - s * v, s * h + c * v
        th, tv = c * th - s * tv, s * th + c * tv
        if blocked:
            ledger.to_db(cycle_offset + j, h)
            h = th = 0j
        else:
            if h != 0:
                returned = True
            th = h
    if not exit_pbs:
        return PolState(h, v, th, tv)
    ledger.to_da(cycle_offset + len(decisions) - 1, h)
    if returned:
        tv = v
    return PolState(0j, v, 0j, tv)


def outer_run(
    state: PolState,
    cfg: CycleConfig,
    policy: Policy,
    ledger: LossLedger,
    *,
    outer_arm_factor: float = 1.0,
) -> PolState:
    """One full run of M outer cycles; returns the state at the final PBS.

    ``policy`` is ``True`` (block all), ``False`` (block none; the doubled-chain
    pattern when ``cfg.av_variant``) or an explicit :class:`BlockSchedule`.
    ``outer_arm_factor`` attenuates the outer (H) arm once per outer cycle just
    before recombination; the removed amplitude goes to ``ledger.attenuated``.
    """
    decisions = _schedule(cfg, policy)
    c, s = math.cos(math.pi / (2 * cfg.outer)), math.sin(math.pi / (2 * cfg.outer))
    steps = cfg.chain_length
    h, v = complex(state.amp_h), complex(state.amp_v)
    th, tv = complex(state.tag_h), complex(state.tag_v)
    for m in range(cfg.outer):
        h, v = c * h - s * v, s * h + c * v
        th, tv = c * th - s * tv, s * th + c * tv
        out = inner_chain(
            PolState(0j, v, 0j, tv),
            cfg,
            decisions[m * steps : (m + 1) * steps],
            ledger,
            cycle_offset=m * steps,
        )
        v, tv = out.amp_v, out.tag_v
        if outer_arm_factor != 1.0:
            ledger.attenuate(m, h * math.sqrt(max(0.0, 1.0 - outer_arm_factor**2)))
            h *= outer_arm_factor
            th *= outer_arm_factor
    return PolState(h, v, th, tv)


def bob_tag_weight(state: PolState) -> float:
    """Squared norm of the amplitude that has occupied Bob's channel."""
    return state.tag_weight()
