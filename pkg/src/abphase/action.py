"""Action accumulation along trajectories and the action-to-phase mapping.

The action decomposes as kinetic + interaction + scalar-potential parts;
the interaction part is the charge times the line integral of A along the
particle's path, and dividing any action by hbar gives the wave phase.
Phases are deliberately not reduced mod 2 pi here: winding information is
physical and reduction belongs to fringe comparison.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import ParticleParams, ParticleState, Trajectory, hamiltonian, kinetic_momentum
from .errors import EmptyTrajectoryError, EndpointMismatchError, FieldMismatchError, UndefinedWavelengthError
from .fields import DEFAULT_QUAD_TOL, Path, PotentialField, line_integral_A


@dataclass(frozen=True)
class ActionBreakdown:
    """Accumulated action split by physical origin; total is their sum."""

    kinetic: float
    interaction: float
    potential: float

    @property
    def total(self) -> float:
        return self.kinetic + self.interaction + self.potential


@dataclass(frozen=True)
class WaveParameters:
    """de Broglie wave data for one particle state: omega = H/hbar, k = mv/hbar."""

    omega: float
    k: np.ndarray
    wavelength: float

    def __post_init__(self):
        k = np.array(self.k, dtype=float)
        k.setflags(write=False)
        object.__setattr__(self, "k", k)

    @property
    def k_mag(self) -> float:
        return float(np.linalg.norm(self.k))


@dataclass(frozen=True)
class EikonalReport:
    """Short-wavelength validity check: the ray picture needs kL >> 1."""

    kL: float
    L: float
    threshold: float
    valid: bool


def accumulate_action(traj: Trajectory, field: PotentialField) -> ActionBreakdown:
    """Integrate the action along an integrated trajectory.

    Kinetic and scalar-potential parts use the composite trapezoid over the
    stored time samples. The interaction part q * int A . dr is evaluated
    along the sampled polyline with a fixed per-segment Simpson rule (one
    extra midpoint evaluation per segment), which keeps it independent of
    the adaptive quadrature it is tested against.
    """
    if field is not traj.field:
        raise FieldMismatchError("trajectory was integrated in a different field instance")
    if len(traj) < 2:
        raise EmptyTrajectoryError("trajectory has no time extent to integrate over")

    m, q = traj.params.m, traj.params.q
    v = traj.velocities()
    s_kin = float(np.trapezoid(0.5 * m * np.sum(v * v, axis=1), traj.times))
    s_pot = float(np.trapezoid(-q * field.phi(traj.positions), traj.times))

    r = traj.positions
    mids = 0.5 * (r[:-1] + r[1:])
    d = r[1:] - r[:-1]
    a_nodes = field.A(r)
    a_mids = field.A(mids)
    per_seg = np.einsum("ij,ij->i", a_nodes[:-1] + 4.0 * a_mids + a_nodes[1:], d) / 6.0
    s_int = q * float(np.sum(per_seg))

    return ActionBreakdown(kinetic=s_kin, interaction=s_int, potential=s_pot)


def interaction_action(
    path: Path, field: PotentialField, q: float, tol: float = DEFAULT_QUAD_TOL
) -> float:
    """q * int A . dr along a geometric path; no time parametrization needed."""
    if q == 0.0:
        return 0.0
    return q * line_integral_A(field, path, tol)


def phase_of(action: float, hbar: float) -> float:
    """Wave phase psi = S / hbar, not reduced mod 2 pi."""
    if hbar <= 0.0:
        raise ValueError("hbar must be positive")
    return action / hbar


def phase_shift(
    path_a: Path,
    path_b: Path,
    field: PotentialField,
    q: float,
    hbar: float,
    tol: float = DEFAULT_QUAD_TOL,
) -> float:
    """Interference phase between two paths sharing both endpoints.

    delta psi = (q/hbar) [int_a A . dr - int_b A . dr], which by Stokes
    equals (q/hbar) times the flux enclosed by path_a followed by path_b
    reversed. Gauge terms cancel exactly because the endpoints coincide.
    """
    if hbar <= 0.0:
        raise ValueError("hbar must be positive")
    for end_a, end_b, which in ((path_a.start, path_b.start, "start"), (path_a.end, path_b.end, "end")):
        if float(np.max(np.abs(end_a - end_b))) > 1e-12:
            raise EndpointMismatchError(f"paths do not share the same {which} point")
    ia = line_integral_A(field, path_a, tol)
    ib = line_integral_A(field, path_b, tol)
    return (q / hbar) * (ia - ib)


def wave_parameters(
    state: ParticleState, params: ParticleParams, field: PotentialField
) -> WaveParameters:
    """omega = H/hbar and k = (P - qA)/hbar; gauge-invariant by construction."""
    mv = kinetic_momentum(state, params, field)
    k = mv / params.hbar
    k_mag = float(np.linalg.norm(k))
    if k_mag == 0.0:
        raise UndefinedWavelengthError("wavelength undefined for zero kinetic momentum")
    omega = hamiltonian(state, params, field) / params.hbar
    return WaveParameters(omega=omega, k=k, wavelength=2.0 * np.pi / k_mag)


def eikonal_check(wp: WaveParameters, L: float, threshold: float = 100.0) -> EikonalReport:
    """Flag whether kL clears the short-wavelength threshold (>= comparison)."""
    if L <= 0.0:
        raise ValueError("characteristic scale L must be positive")
    kl = wp.k_mag * L
    return EikonalReport(kL=kl, L=L, threshold=threshold, valid=bool(kl >= threshold))
