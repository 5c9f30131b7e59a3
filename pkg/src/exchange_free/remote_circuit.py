"""Controlled-controlled-U on Alice's target with Bob's controls as classical bits.

The standard two-control network is C2-V, CNOT(1->2), C2-V^dagger, CNOT(1->2),
C1-V with V^2 = U. When the controls are bits Bob chooses, every controlled
gate collapses to "apply the gate or not", which Bob can enact with the
exchange-free single-qubit protocol.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .gates import IDENTITY, Op2, PolState, is_unitary

GateRunner = Callable[[PolState, Op2], PolState]


@dataclass(frozen=True)
class ClassicalControls:
    b1: int
    b2: int

    def __post_init__(self):
        if self.b1 not in (0, 1) or self.b2 not in (0, 1):
            raise ValueError("control values must be bits")


def sqrt_unitary(u: Op2) -> Op2:
    """Principal square root of a 2x2 unitary.

    Eigenvalue phases are taken in (-pi, pi]; a phase numerically at -pi is
    moved to +pi so that, e.g., sqrt(X) is always (1+i)/2 I + (1-i)/2 X.
    """
    u = np.asarray(u, dtype=complex)
    if not is_unitary(u):
        raise ValueError("matrix is not unitary")
    vals, vecs = np.linalg.eig(u)
    # unitary matrices are normal, so orthonormalise degenerate eigenspaces
    vecs, _ = np.linalg.qr(vecs)
    phases = np.angle(vals)
    phases = np.where(phases <= -math.pi + 1e-12, phases + 2 * math.pi, phases)
    root = vecs @ np.diag(np.exp(0.5j * phases)) @ vecs.conj().T
    if not np.allclose(root @ root, u, atol=1e-10, rtol=0):
        raise ArithmeticError("square root failed to reproduce the input")
    return root


def _matrix_runner(state: PolState, gate: Op2) -> PolState:
    return state.apply(gate)


def apply_network(
    target: PolState,
    controls: ClassicalControls,
    u: Op2,
    runner: Optional[GateRunner] = None,
) -> PolState:
    """Run the network on Alice's target with Bob's bits substituted for the controls.

    ``runner`` applies one single-qubit gate to the target; by default it is
    plain matrix multiplication, but it can be an exchange-free executor.
    Gates that Bob's bits switch off are skipped (identity).
    """
    run = runner or _matrix_runner
    v = sqrt_unitary(u)
    v_dag = v.conj().T
    c1, c2 = controls.b1, controls.b2
    state = target
    for gate, on in _sequence(v, v_dag, c1, c2):
        if on:
            state = run(state, gate)
    return state


def _sequence(v: Op2, v_dag: Op2, c1: int, c2: int):
    yield v, c2
    c2 ^= c1  # CNOT from control 1 onto control 2
    yield v_dag, c2
    c2 ^= c1
    yield v, c1


def network_gates(controls: ClassicalControls, u: Op2) -> list[Op2]:
    """The single-qubit gates Bob must enact on the target, in order."""
    v = sqrt_unitary(u)
    return [g for g, on in _sequence(v, v.conj().T, controls.b1, controls.b2) if on]


def verification_table(u: Op2) -> list[dict]:
    """Rows over the four control patterns and the two basis targets."""
    rows = []
    for b1 in (0, 1):
        for b2 in (0, 1):
            expected_op = u if b1 and b2 else IDENTITY
            for name, target in (("H", PolState.h()), ("V", PolState.v())):
                out = apply_network(target, ClassicalControls(b1, b2), u)
                expected = target.apply(expected_op)
                err = float(np.abs(out.vector - expected.vector).max())
                rows.append(
                    {"b1": b1, "b2": b2, "target": name, "output": out.vector, "error": err}
                )
    return rows
