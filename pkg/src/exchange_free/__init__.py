"""Amplitude-exact simulation of exchange-free single-qubit computation."""
from .gates import PolState, dist_up_to_global_phase, qwp, qwp_dagger, rx, ry, rz
from .interferometer import BlockSchedule, CycleConfig, LossLedger, bob_tag_weight, inner_chain, outer_run
from .phase_unit import PhaseUnitConfig, PhaseUnitResult, run_phase_unit, send_dit, survival_surface
from .protocol import BobProgram, ProtocolResult, compile_unitary, run_protocol, ry_rotator, rz_rotator
from .ry_direct import RyDirectConfig, run_ry_direct, run_ry_direct_arbitrary
from .remote_circuit import ClassicalControls, apply_network, sqrt_unitary

__version__ = "0.1.0"
