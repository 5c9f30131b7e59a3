"""Kraus-operator description of the inner and outer interferometer chains.

Modes are single-occupancy (0 or 1 photon). A multi-mode space is the tensor
product of its modes in the listed order, so a basis label such as ``"10"``
over modes ``("a2", "a1")`` means one photon in a2 and none in a1.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .gates import ry

PRUNE = 1e-14


def basis_labels(modes: Sequence[str]) -> tuple[str, ...]:
    return tuple("".join(bits) for bits in itertools.product("01", repeat=len(modes)))


def one_photon_sector(modes: Sequence[str]) -> list[int]:
    """Indices of basis states with at most one photon."""
    return [i for i, lab in enumerate(basis_labels(modes)) if lab.count("1") <= 1]


def ket(modes: Sequence[str], occupied: str | None = None) -> np.ndarray:
    """Basis vector with a single photon in mode ``occupied`` (vacuum if None)."""
    lab = "".join("1" if m == occupied else "0" for m in modes)
    vec = np.zeros(2 ** len(modes), dtype=complex)
    vec[basis_labels(modes).index(lab)] = 1
    return vec


@dataclass
class KrausChannel:
    ops: list[np.ndarray]
    modes: tuple[str, ...]
    pruned_mass: float = 0.0

    def __post_init__(self):
        self.modes = tuple(self.modes)
        d = 2 ** len(self.modes)
        self.ops = [np.asarray(x, dtype=complex) for x in self.ops]
        for x in self.ops:
            if x.shape != (d, d):
                raise ValueError(f"Kraus operator of shape {x.shape} on {len(self.modes)} modes")

    @property
    def dim(self) -> int:
        return 2 ** len(self.modes)

    @property
    def basis(self) -> tuple[str, ...]:
        return basis_labels(self.modes)

    @classmethod
    def identity(cls, modes: Sequence[str]) -> KrausChannel:
        return cls([np.eye(2 ** len(modes))], tuple(modes))

    @classmethod
    def unitary(cls, u: np.ndarray, modes: Sequence[str]) -> KrausChannel:
        return cls([u], tuple(modes))

    def _check(self, other_modes: Sequence[str]) -> None:
        if tuple(other_modes) != self.modes:
            raise ValueError(f"basis mismatch: {self.modes} vs {tuple(other_modes)}")

    def apply(self, rho: DensityOp) -> DensityOp:
        self._check(rho.modes)
        out = sum(x @ rho.matrix @ x.conj().T for x in self.ops)
        return DensityOp(np.asarray(out, dtype=complex), self.modes)

    def completeness(self) -> np.ndarray:
        return sum(x.conj().T @ x for x in self.ops)

    def is_trace_nonincreasing(self, atol: float = 1e-10) -> bool:
        eig = np.linalg.eigvalsh(self.completeness())
        return bool(eig.max() <= 1 + atol)

    def choi(self) -> np.ndarray:
        """sum_i vec(X_i) vec(X_i)^dagger, row-major vec."""
        vecs = np.array([x.reshape(-1) for x in self.ops])
        return vecs.T @ vecs.conj()

    def simplified(self, tol: float = PRUNE, *, merge: bool = True) -> KrausChannel:
        """Drop operators with norm < tol and merge operators that are scalar multiples.

        Merging lambda_i X into sqrt(sum |lambda_i|^2) X leaves the channel unchanged.
        """
        groups: list[tuple[np.ndarray, float]] = []
        pruned = self.pruned_mass
        for x in self.ops:
            nrm = np.linalg.norm(x)
            if nrm < tol:
                pruned += nrm**2
                continue
            if not merge:
                groups.append((x / nrm, nrm**2))
                continue
            unit = x / nrm
            for i, (g, w) in enumerate(groups):
                if abs(abs(np.vdot(g, unit)) - 1) < 1e-13:
                    groups[i] = (g, w + nrm**2)
                    break
            else:
                # fix the phase of the representative: largest entry real positive
                j = np.argmax(np.abs(unit))
                unit = unit * (abs(unit.flat[j]) / unit.flat[j])
                groups.append((unit, nrm**2))
        if pruned > 1e-12:
            raise ArithmeticError(f"pruned Kraus weight {pruned:.3e} exceeds 1e-12")
        return KrausChannel([g * math.sqrt(w) for g, w in groups], self.modes, pruned)

    def embed(self, modes: Sequence[str]) -> KrausChannel:
        """Act as identity on the modes of ``modes`` not in this channel."""
        modes = tuple(modes)
        missing = [m for m in self.modes if m not in modes]
        if missing:
            raise ValueError(f"modes {missing} not in target space")
        return KrausChannel([_embed_op(x, self.modes, modes) for x in self.ops], modes)


def _embed_op(x: np.ndarray, sub: Sequence[str], full: Sequence[str]) -> np.ndarray:
    n = len(full)
    rest = [m for m in full if m not in sub]
    order = list(sub) + rest
    big = np.kron(x, np.eye(2 ** len(rest)))
    # big acts on modes in `order`; permute tensor axes into `full` order
    t = big.reshape([2] * (2 * n))
    perm = [order.index(m) for m in full]
    t = t.transpose(perm + [n + p for p in perm])
    return t.reshape(2**n, 2**n)


@dataclass
class DensityOp:
    matrix: np.ndarray
    modes: tuple[str, ...]

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=complex)
        self.modes = tuple(self.modes)

    @classmethod
    def pure(cls, vec: np.ndarray, modes: Sequence[str]) -> DensityOp:
        vec = np.asarray(vec, dtype=complex)
        return cls(np.outer(vec, vec.conj()), tuple(modes))

    def is_valid(self, atol: float = 1e-12) -> bool:
        m = self.matrix
        if not np.allclose(m, m.conj().T, atol=atol, rtol=0):
            return False
        if np.trace(m).real > 1 + atol:
            return False
        return bool(np.linalg.eigvalsh((m + m.conj().T) / 2).min() >= -1e-10)

    def partial_trace(self, mode: str) -> DensityOp:
        n = len(self.modes)
        i = self.modes.index(mode)
        t = self.matrix.reshape([2] * (2 * n))
        t = np.trace(t, axis1=i, axis2=n + i)
        rest = tuple(m for m in self.modes if m != mode)
        return DensityOp(t.reshape(2 ** (n - 1), 2 ** (n - 1)), rest)


def compose(x: KrausChannel, y: KrausChannel, *, merge: bool = True) -> KrausChannel:
    """The channel x after y: Kraus set {X_i Y_j}, numerically-zero products pruned."""
    x._check(y.modes)
    ops = [xi @ yj for xi in x.ops for yj in y.ops]
    return KrausChannel(ops, x.modes, x.pruned_mass + y.pruned_mass).simplified(merge=merge)


def power(x: KrausChannel, n: int, *, merge: bool = True) -> KrausChannel:
    if n < 0:
        raise ValueError("power must be non-negative")
    out = KrausChannel.identity(x.modes)
    for _ in range(n):
        out = compose(x, out, merge=merge)
    return out


def trace_out_vacuum(ch: KrausChannel, mode: str, *, merge: bool = True) -> KrausChannel:
    """Channel on the remaining modes: prepare ``mode`` in vacuum, apply ``ch``, trace ``mode``.

    Kraus operators are (I x <m|) X_i (I x |0>) for m in {0, 1}.
    """
    idx = ch.modes.index(mode)
    n = len(ch.modes)
    rest = tuple(m for m in ch.modes if m != mode)
    ops = []
    for x in ch.ops:
        t = x.reshape([2] * (2 * n))
        t = np.take(t, 0, axis=n + idx)  # input in vacuum
        for m in (0, 1):
            ops.append(np.take(t, m, axis=idx).reshape(2 ** (n - 1), 2 ** (n - 1)))
    return KrausChannel(ops, rest, ch.pruned_mass).simplified(merge=merge)


def ry_coupling(h_mode: str, v_mode: str, theta: float) -> np.ndarray:
    """ry(theta) on the one-photon subspace of two modes, identity elsewhere.

    ``h_mode`` plays the role of polarisation H and ``v_mode`` of V, so a photon
    in ``v_mode`` picks up -sin(theta/2) in ``h_mode``.
    """
    modes = (h_mode, v_mode)
    u = np.eye(4, dtype=complex)
    idx = [basis_labels(modes).index(lab) for lab in ("10", "01")]
    r = ry(theta)
    for a in range(2):
        for b in range(2):
            u[idx[a], idx[b]] = r[a, b]
    return u


def bob_block() -> KrausChannel:
    """Bob absorbs whatever is in his mode: {|0><1|, |0><0|}."""
    return KrausChannel([np.array([[0, 1], [0, 0]]), np.array([[1, 0], [0, 0]])], ("b",))


def bob_no_block(coherent: bool = True) -> KrausChannel:
    """Bob reflects his mode back.

    The coherent form is the single operator |0><0| + |1><1|. With
    ``coherent=False`` the two projectors are separate Kraus operators, which
    dephases Bob's mode and destroys the inner-chain interference.
    """
    if coherent:
        return KrausChannel([np.eye(2)], ("b",))
    return KrausChannel([np.diag([0, 1]), np.diag([1, 0])], ("b",))


def inner_cycle(n: int, blocking: bool, *, coherent: bool = True) -> KrausChannel:
    """One inner cycle on (a1, b): coupling ry(pi/N) then Bob's action."""
    bob = bob_block() if blocking else bob_no_block(coherent)
    modes = ("a1", "b")
    r = KrausChannel.unitary(ry_coupling("b", "a1", math.pi / n), modes)
    return compose(bob.embed(modes), r)


def inner_channel(
    n: int, blocking: bool, *, coherent: bool = True, merge: bool = True
) -> KrausChannel:
    """A1 channel on mode a1 from N inner cycles with Bob's mode traced out.

    ``merge=False`` keeps one operator per absorption cycle instead of folding
    proportional operators together.
    """
    if n < 1:
        raise ValueError("N must be >= 1")
    chain = power(inner_cycle(n, blocking, coherent=coherent), n, merge=merge)
    return trace_out_vacuum(chain, "b", merge=merge)


def build_inner_channels(n: int) -> tuple[KrausChannel, KrausChannel]:
    """(A1 blocking, A1 not blocking)."""
    return inner_channel(n, True), inner_channel(n, False)


def displayed_inner_channels(n: int) -> tuple[KrausChannel, KrausChannel]:
    """The closed-form A1 Kraus sets as written down for the protocol.

    The blocking set lists only the final-cycle absorption operator; the
    constructed channel also has one for every earlier cycle.
    """
    c, s = math.cos(math.pi / (2 * n)), math.sin(math.pi / (2 * n))
    one = np.array([[0, 0], [0, 1]])
    zero = np.array([[1, 0], [0, 0]])
    lower = np.array([[0, 1], [0, 0]])
    blocking = KrausChannel([c**n * one, zero, c ** (n - 1) * s * lower], ("a1",))
    open_ = KrausChannel([lower, zero], ("a1",))
    return blocking, open_


def inner_absorption_ops(n: int) -> list[np.ndarray]:
    """Absorption operators c^{j-1} s |0><1| for j = 1..N (c = cos(pi/2N))."""
    c, s = math.cos(math.pi / (2 * n)), math.sin(math.pi / (2 * n))
    lower = np.array([[0, 1], [0, 0]], dtype=complex)
    return [c ** (j - 1) * s * lower for j in range(1, n + 1)]


def outer_channel(m: int, n: int, blocking: bool) -> KrausChannel:
    """A12 channel on (a2, a1): M repetitions of ry(pi/M) coupling then A1."""
    if m < 1 or n < 1:
        raise ValueError("M and N must be >= 1")
    modes = ("a2", "a1")
    a1 = inner_channel(n, blocking).embed(modes)
    r = KrausChannel.unitary(ry_coupling("a2", "a1", math.pi / m), modes)
    return power(compose(a1, r), m)


def build_outer_channels(m: int, n: int) -> tuple[KrausChannel, KrausChannel]:
    """(A12 blocking, A12 not blocking)."""
    return outer_channel(m, n, True), outer_channel(m, n, False)


ONE_PHOTON = ("10", "01")  # (a2, a1) = (H, V)


def transfer_block(ch: KrausChannel) -> np.ndarray:
    """2x2 one-photon -> one-photon block of the photon-preserving operator.

    Rows/columns ordered (photon in a2, photon in a1). Raises if more than one
    operator keeps the photon, since then no single block exists.
    """
    idx = [ch.basis.index(lab) for lab in ONE_PHOTON]
    blocks = [x[np.ix_(idx, idx)] for x in ch.ops]
    keep = [b for b in blocks if np.linalg.norm(b) > 1e-13]
    if len(keep) > 1:
        raise ArithmeticError("more than one photon-preserving Kraus operator")
    if not keep:
        return np.zeros((2, 2), dtype=complex)
    blk = keep[0]
    # the vacuum-to-vacuum entry of the same operator fixes the phase convention
    op = next(x for x, b in zip(ch.ops, blocks) if b is blk)
    vac = op[0, 0]
    if abs(vac) > 1e-13:
        blk = blk * (abs(vac) / vac)
    return blk


def coefficients(m: int, n: int) -> tuple[float, float, float, float]:
    """(c1, c2, c3, c4) of the blocking A12 channel.

    c1: H stays H, c2: V stays V, c3: H becomes V, c4: V becomes H.
    """
    blk = transfer_block(outer_channel(m, n, True))
    c1, c4 = blk[0, 0], blk[0, 1]
    c3, c2 = blk[1, 0], blk[1, 1]
    return tuple(float(np.real_if_close(c).real) for c in (c1, c2, c3, c4))


def loss_probabilities(ch: KrausChannel) -> tuple[float, float]:
    """Probability that a photon entering in a2 (resp. a1) ends in the vacuum."""
    vac = ch.basis.index("00")
    out = []
    for lab in ONE_PHOTON:
        rho = np.zeros((ch.dim, ch.dim), dtype=complex)
        i = ch.basis.index(lab)
        rho[i, i] = 1
        res = ch.apply(DensityOp(rho, ch.modes)).matrix
        out.append(float(res[vac, vac].real))
    return out[0], out[1]


def kraus_subset_match(displayed: KrausChannel, constructed: KrausChannel) -> float:
    """Worst entry-wise distance from each displayed operator to its best match.

    Operators are compared up to a per-operator phase, and each constructed
    operator is also split by input photon number, since the displayed sets
    list vacuum and one-photon pieces separately.
    """
    pieces = []
    for x in constructed.ops:
        for sector in range(len(constructed.modes) + 1):
            cols = [i for i, lab in enumerate(constructed.basis) if lab.count("1") == sector]
            part = np.zeros_like(x)
            part[:, cols] = x[:, cols]
            if np.linalg.norm(part) > PRUNE:
                pieces.append(part)
    worst = 0.0
    for d in displayed.ops:
        # a numerically-zero displayed operator may simply be absent
        best = float(np.abs(d).max())
        for p in pieces:
            ov = np.vdot(p, d)
            phase = ov / abs(ov) if abs(ov) > 0 else 1.0
            best = min(best, float(np.abs(d - phase * p).max()))
        worst = max(worst, best)
    return worst


def channel_distance(x: KrausChannel, y: KrausChannel, inputs: Sequence[np.ndarray]) -> float:
    """Max entry-wise difference of the outputs on the given density matrices."""
    x._check(y.modes)
    worst = 0.0
    for rho in inputs:
        d = DensityOp(rho, x.modes)
        worst = max(worst, float(np.abs(x.apply(d).matrix - y.apply(d).matrix).max()))
    return worst


def sector_inputs(modes: Sequence[str]) -> list[np.ndarray]:
    """Density matrices spanning the <=1-photon operators that respect photon number.

    Vacuum, each one-photon basis state, and the real and imaginary
    superpositions of each pair of one-photon states.
    """
    labels = basis_labels(modes)
    dim = len(labels)
    singles = [i for i, lab in enumerate(labels) if lab.count("1") == 1]
    vac = labels.index("0" * len(modes))
    out = []

    def pure(vec):
        return np.outer(vec, vec.conj())

    e = np.eye(dim, dtype=complex)
    out.append(pure(e[vac]))
    for i in singles:
        out.append(pure(e[i]))
    for i, j in itertools.combinations(singles, 2):
        out.append(pure((e[i] + e[j]) / math.sqrt(2)))
        out.append(pure((e[i] + 1j * e[j]) / math.sqrt(2)))
    return out


def to_json(ch: KrausChannel) -> dict:
    """Basis labels plus complex entries as {re, im}."""
    return {
        "modes": list(ch.modes),
        "basis": list(ch.basis),
        "ops": [
            [[{"re": float(z.real), "im": float(z.imag)} for z in row] for row in x]
            for x in ch.ops
        ],
    }


def simulated_output(m: int, n: int, blocking: bool, vec: np.ndarray) -> np.ndarray:
    """Density matrix on (a2, a1) from the step simulator for a pure input.

    ``vec`` is a 4-vector over (a2, a1) with no two-photon part and no
    coherence between vacuum and one photon. The surviving photon stays
    coherent; lost probability is returned to the vacuum.
    """
    from .gates import PolState
    from .interferometer import CycleConfig, LossLedger, outer_run

    modes = ("a2", "a1")
    labels = basis_labels(modes)
    vec = np.asarray(vec, dtype=complex)
    vac = labels.index("00")
    h, v = vec[labels.index("10")], vec[labels.index("01")]
    if abs(vec[labels.index("11")]) > 0:
        raise ValueError("two-photon input")
    if abs(vec[vac]) > 0 and abs(h) + abs(v) > 0:
        raise ValueError("input mixes vacuum and one photon coherently")
    out = np.zeros((4, 4), dtype=complex)
    out[vac, vac] = abs(vec[vac]) ** 2
    if abs(h) + abs(v) == 0:
        return out
    ledger = LossLedger()
    st = outer_run(PolState(h, v), CycleConfig(m, n), blocking, ledger)
    psi = np.zeros(4, dtype=complex)
    psi[labels.index("10")], psi[labels.index("01")] = st.amp_h, st.amp_v
    out += np.outer(psi, psi.conj())
    out[vac, vac] += ledger.total_lost_prob
    return out


def verify(m: int, n: int, tol: float = 1e-10) -> dict:
    """Check the constructed channels against closed forms and the step simulator."""
    shown_b, shown_nb = displayed_inner_channels(n)
    a1_b = inner_channel(n, True, merge=False)
    a1_nb = inner_channel(n, False, merge=False)
    a1_dev = max(kraus_subset_match(shown_b, a1_b), kraus_subset_match(shown_nb, a1_nb))
    missing = inner_absorption_ops(n)[:-1]
    extra_dev = 0.0
    if missing:
        extra_dev = kraus_subset_match(KrausChannel(missing, ("a1",)), a1_b)

    sim_dev = 0.0
    complete_dev = 0.0
    channels = {}
    for blocking in (True, False):
        ch = outer_channel(m, n, blocking)
        channels[blocking] = ch
        for rho in sector_inputs(ch.modes):
            w, vecs = np.linalg.eigh(rho)
            vec = vecs[:, -1] * math.sqrt(w[-1])
            sim_dev = max(sim_dev, float(np.abs(ch.apply(DensityOp(rho, ch.modes)).matrix
                                                - simulated_output(m, n, blocking, vec)).max()))
        sector = one_photon_sector(ch.modes)
        comp = ch.completeness()[np.ix_(sector, sector)]
        complete_dev = max(complete_dev, float(np.abs(comp - np.eye(len(sector))).max()))

    c1, c2, c3, c4 = coefficients(m, n)
    loss_h, loss_v = loss_probabilities(channels[True])
    loss_form_dev = float(max(abs(loss_h - (1 - c1**2 - c3**2)), abs(loss_v - (1 - c2**2 - c4**2))))
    nb_keep = transfer_block(channels[False])[0, 0].real
    nb_dev = float(abs(nb_keep - math.cos(math.pi / (2 * m)) ** m))

    checks = {
        "inner_closed_form": bool(a1_dev <= tol),
        "inner_earlier_absorptions": bool(extra_dev <= tol),
        "outer_vs_simulator": bool(sim_dev <= tol),
        "trace_preserving": bool(complete_dev <= tol),
        "loss_completeness_forms": bool(loss_form_dev <= tol),
        "open_retention": bool(nb_dev <= tol),
    }
    return {
        "ok": all(checks.values()),
        "M": m,
        "N": n,
        "checks": checks,
        "max_deviation": float(max(a1_dev, extra_dev, sim_dev, complete_dev, loss_form_dev, nb_dev)),
        "deviations": {
            "inner_closed_form": a1_dev,
            "inner_earlier_absorptions": extra_dev,
            "outer_vs_simulator": sim_dev,
            "trace_preserving": complete_dev,
            "loss_completeness_forms": loss_form_dev,
            "open_retention": nb_dev,
        },
        "coefficients": {"c1": c1, "c2": c2, "c3": c3, "c4": c4},
    }
