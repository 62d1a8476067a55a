"""Charged-particle dynamics in canonical (Hamiltonian) form.

The state is (r, P) with P the canonical momentum; the kinetic momentum is
m v = P - q A(r). Forces come from analytic field gradients only, so the
equations of motion are exact up to the integrator and gauge covariance can
be tested without differencing noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import SingularityHitError, SingularPointError
from .fields import PotentialField, _as_points


@dataclass(frozen=True)
class ParticleParams:
    """Mass, charge, and action quantum for one particle species."""

    m: float
    q: float
    hbar: float = 1.0

    def __post_init__(self):
        if self.m <= 0.0:
            raise ValueError("mass must be positive")
        if self.hbar <= 0.0:
            raise ValueError("hbar must be positive")


@dataclass(frozen=True)
class ParticleState:
    """Phase-space sample: time, position, canonical momentum."""

    t: float
    r: np.ndarray
    P: np.ndarray

    def __post_init__(self):
        r = np.array(self.r, dtype=float)
        P = np.array(self.P, dtype=float)
        if r.shape != (2,) or P.shape != (2,):
            raise ValueError("state position and momentum must be 2-vectors")
        r.setflags(write=False)
        P.setflags(write=False)
        object.__setattr__(self, "t", float(self.t))
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "P", P)


@dataclass(frozen=True)
class Trajectory:
    """Time-ordered (r, P) samples from one integration run.

    Stored as flat arrays for cheap vectorized post-processing; `state(i)`
    and iteration give ParticleState views. `max_step` records the step
    bound the integrator was configured with.
    """

    params: ParticleParams
    field: PotentialField
    times: np.ndarray
    positions: np.ndarray
    momenta: np.ndarray
    max_step: float

    def __post_init__(self):
        t = np.asarray(self.times, float)
        r = np.asarray(self.positions, float)
        p = np.asarray(self.momenta, float)
        if t.ndim != 1 or r.shape != (t.size, 2) or p.shape != (t.size, 2):
            raise ValueError("inconsistent sample array shapes")
        dt = np.diff(t)
        if np.any(dt <= 0.0):
            raise ValueError("sample times must be strictly increasing")
        if dt.size and float(np.max(dt)) > self.max_step * (1.0 + 1e-9):
            raise ValueError("sample spacing exceeds the configured max step")
        for arr in (t, r, p):
            arr.setflags(write=False)

    def __len__(self) -> int:
        return int(self.times.size)

    def state(self, i: int) -> ParticleState:
        return ParticleState(self.times[i], self.positions[i], self.momenta[i])

    def __iter__(self):
        return (self.state(i) for i in range(len(self)))

    @property
    def initial(self) -> ParticleState:
        return self.state(0)

    @property
    def final(self) -> ParticleState:
        return self.state(len(self) - 1)

    def velocities(self) -> np.ndarray:
        """Kinetic velocity (P - qA)/m at every sample, shape (n, 2)."""
        A = self.field.A(self.positions)
        return (self.momenta - self.params.q * A) / self.params.m


def kinetic_momentum(state: ParticleState, params: ParticleParams, field: PotentialField) -> np.ndarray:
    """m v = P - q A(r)."""
    return state.P - params.q * field.A(state.r)


def canonical_momentum(v, r, params: ParticleParams, field: PotentialField) -> np.ndarray:
    """P = m v + q A(r); at rest this is the pure interaction momentum q A."""
    v = _as_points(v)
    return params.m * v + params.q * field.A(r)


def hamiltonian(state: ParticleState, params: ParticleParams, field: PotentialField) -> float:
    """H = |P - qA|^2 / 2m + q phi."""
    mv = kinetic_momentum(state, params, field)
    return float(mv @ mv / (2.0 * params.m) + params.q * field.phi(state.r))


def eom_rhs(state: ParticleState, params: ParticleParams, field: PotentialField):
    """Hamilton's equations: returns (dr/dt, dP/dt).

    dr/dt = (P - qA)/m and dP/dt_j = (q/m) (P - qA) . dA/dx_j - q dphi/dx_j,
    both from analytic field derivatives.
    """
    mv = kinetic_momentum(state, params, field)
    drdt = mv / params.m
    jac = field.A_jacobian(state.r)
    dPdt = (params.q / params.m) * (mv @ jac) - params.q * field.phi_gradient(state.r)
    return drdt, dPdt


def _rhs_flat(t, y, params, field):
    r, P = y[:2], y[2:]
    mv = P - params.q * field.A(r)
    jac = field.A_jacobian(r)
    out = np.empty(4)
    out[:2] = mv / params.m
    out[2:] = (params.q / params.m) * (mv @ jac) - params.q * field.phi_gradient(r)
    return out


def integrate(
    initial: ParticleState,
    params: ParticleParams,
    field: PotentialField,
    t_end: float,
    dt: float = 1e-3,
) -> Trajectory:
    """Fixed-step RK4 integration of Hamilton's equations up to t_end.

    Samples are stored every step; the final step is shortened so the last
    sample lands on t_end exactly. Hitting a field singularity raises
    SingularityHitError with the partial trajectory attached.
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    if t_end <= initial.t:
        raise ValueError("t_end must exceed the initial time")

    span = t_end - initial.t
    n_full = int(math.floor(span / dt + 1e-9))
    rem = span - n_full * dt
    # stamp times from exact products so roundoff never accumulates
    times = initial.t + dt * np.arange(n_full + 1)
    if rem > 1e-9 * dt:
        times = np.append(times, t_end)
    else:
        times[-1] = t_end
    if times.size < 2:
        raise ValueError("integration span is too short to take a step")

    n = times.size
    ys = np.empty((n, 4))
    ys[0, :2] = initial.r
    ys[0, 2:] = initial.P

    y = ys[0].copy()
    for i in range(1, n):
        t, h = times[i - 1], times[i] - times[i - 1]
        try:
            k1 = _rhs_flat(t, y, params, field)
            k2 = _rhs_flat(t + 0.5 * h, y + 0.5 * h * k1, params, field)
            k3 = _rhs_flat(t + 0.5 * h, y + 0.5 * h * k2, params, field)
            k4 = _rhs_flat(t + h, y + h * k3, params, field)
        except SingularPointError as err:
            partial = Trajectory(params, field, times[:i].copy(), ys[:i, :2].copy(), ys[:i, 2:].copy(), dt)
            raise SingularityHitError(
                f"trajectory hit a field singularity near t = {t:.6g}", partial=partial
            ) from err
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        ys[i] = y

    return Trajectory(params, field, times, ys[:, :2].copy(), ys[:, 2:].copy(), dt)
