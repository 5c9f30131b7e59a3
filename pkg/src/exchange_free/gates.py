"""2x2 polarisation operators and the photon state type.

Basis order is (H, V) everywhere. H plays the role of |0>, V of |1>.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

ATOL = 1e-12

Op2 = np.ndarray

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY = np.eye(2, dtype=complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)


def _check_angle(theta: float) -> float:
    theta = float(theta)
    if not math.isfinite(theta):
        raise ValueError(f"rotation angle must be finite, got {theta!r}")
    return theta


def _checked_unitary(u: Op2) -> Op2:
    if not is_unitary(u, atol=ATOL):
        raise ArithmeticError("constructed operator is not unitary")
    return u


def rx(theta: float) -> Op2:
    """exp(-i theta sigma_x / 2)."""
    theta = _check_angle(theta)
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return _checked_unitary(np.array([[c, -1j * s], [-1j * s, c]], dtype=complex))


def ry(theta: float) -> Op2:
    """exp(-i theta sigma_y / 2); a half wave plate acting on polarisation."""
    theta = _check_angle(theta)
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return _checked_unitary(np.array([[c, -s], [s, c]], dtype=complex))


def rz(theta: float) -> Op2:
    """exp(-i theta sigma_z / 2) = diag(e^{-i theta/2}, e^{i theta/2})."""
    theta = _check_angle(theta)
    return _checked_unitary(
        np.array([[cmath.exp(-0.5j * theta), 0], [0, cmath.exp(0.5j * theta)]], dtype=complex)
    )


def qwp() -> Op2:
    """Quarter wave plate aligned at -pi/4, equal to rx(-pi/2)."""
    return rx(-math.pi / 2)


def qwp_dagger() -> Op2:
    return rx(math.pi / 2)


def is_unitary(u: Op2, atol: float = 1e-10) -> bool:
    u = np.asarray(u)
    if u.shape != (2, 2) or not np.all(np.isfinite(u)):
        return False
    return bool(np.allclose(u.conj().T @ u, IDENTITY, atol=atol, rtol=0))


def dist_up_to_global_phase(u: Op2, v: Op2) -> float:
    """min over real phi of ||u - e^{i phi} v||_F.

    The minimum sits at phi = arg tr(v^dagger u). The norm is evaluated there
    directly; the expanded closed form loses half the digits to cancellation.
    Works for vectors as well as matrices.
    """
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    overlap = np.vdot(v, u)
    phase = overlap / abs(overlap) if abs(overlap) > 0 else 1.0
    return float(np.linalg.norm(u - phase * v))


@dataclass(frozen=True)
class PolState:
    """Single-photon polarisation amplitudes, possibly sub-normalised.

    ``tag_h`` / ``tag_v`` hold the part of each amplitude that has been in
    Bob's channel mode. They transform linearly with the amplitudes.
    """

    amp_h: complex = 1.0
    amp_v: complex = 0.0
    tag_h: complex = 0.0
    tag_v: complex = 0.0

    @classmethod
    def h(cls) -> PolState:
        return cls(1.0, 0.0)

    @classmethod
    def v(cls) -> PolState:
        return cls(0.0, 1.0)

    @classmethod
    def from_vector(cls, vec) -> PolState:
        a, b = np.asarray(vec, dtype=complex)
        return cls(complex(a), complex(b))

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.amp_h, self.amp_v], dtype=complex)

    @property
    def tag_vector(self) -> np.ndarray:
        return np.array([self.tag_h, self.tag_v], dtype=complex)

    def norm_sq(self) -> float:
        return abs(self.amp_h) ** 2 + abs(self.amp_v) ** 2

    def tag_weight(self) -> float:
        return abs(self.tag_h) ** 2 + abs(self.tag_v) ** 2

    def apply(self, op: Op2) -> PolState:
        a, b = op @ self.vector
        ta, tb = op @ self.tag_vector
        return PolState(complex(a), complex(b), complex(ta), complex(tb))

    def scale(self, factor: complex) -> PolState:
        return PolState(
            self.amp_h * factor, self.amp_v * factor, self.tag_h * factor, self.tag_v * factor
        )

    def __add__(self, other: PolState) -> PolState:
        return PolState(
            self.amp_h + other.amp_h,
            self.amp_v + other.amp_v,
            self.tag_h + other.tag_h,
            self.tag_v + other.tag_v,
        )

    def h_part(self) -> PolState:
        return PolState(self.amp_h, 0.0, self.tag_h, 0.0)

    def v_part(self) -> PolState:
        return PolState(0.0, self.amp_v, 0.0, self.tag_v)

    def normalized(self) -> PolState:
        n = math.sqrt(self.norm_sq())
        if n == 0.0:
            return PolState(0.0, 0.0)
        return self.scale(1.0 / n)

    def canonical(self) -> np.ndarray:
        """Amplitude vector with global phase removed: first nonzero entry real and >= 0."""
        vec = self.vector
        for amp in vec:
            if abs(amp) > ATOL:
                return vec * (abs(amp) / amp)
        return vec


def state_distance(a: PolState, b: PolState) -> float:
    """Distance between two states' amplitude vectors, ignoring global phase."""
    return dist_up_to_global_phase(a.vector, b.vector)
