"""Electromagnetic potential models on the plane.

All geometry is 2D: the field region is a disc (or line) threading the plane,
the magnetic field B is the out-of-plane scalar curl of the in-plane vector
potential A, and the scalar potential phi is carried along but is zero for
every shipped model. Field objects are immutable and every evaluation method
is vectorized over a leading batch dimension: points have shape (..., 2) and
results broadcast accordingly.

The module also owns the line-integral machinery: adaptive Simpson quadrature
of A . dr along piecewise-linear paths, which everything downstream (action
accumulation, interference phases, lattice link factors) is built on.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import MultivaluedGaugeError, QuadratureError, SingularPointError

TWO_PI = 2.0 * np.pi

#: adaptive quadrature defaults (relative tolerance, bisection depth cap)
DEFAULT_QUAD_TOL = 1e-10
MAX_QUAD_DEPTH = 30


def _as_points(points) -> np.ndarray:
    p = np.asarray(points, dtype=float)
    if p.shape[-1:] != (2,):
        raise ValueError(f"expected points of shape (..., 2), got {p.shape}")
    return p


# ---------------------------------------------------------------------------
# paths


@dataclass(frozen=True)
class Path:
    """Piecewise-linear integration path through the plane.

    waypoints: (n, 2) array of vertices, n >= 2, traversed in order.
    closed:    if True the first and last waypoints must coincide exactly.
    """

    waypoints: np.ndarray
    closed: bool = False

    def __post_init__(self):
        wp = np.array(self.waypoints, dtype=float)
        if wp.ndim != 2 or wp.shape[1] != 2 or wp.shape[0] < 2:
            raise ValueError(f"path needs at least 2 planar waypoints, got shape {wp.shape}")
        if self.closed and not np.array_equal(wp[0], wp[-1]):
            raise ValueError("closed path must repeat its first waypoint exactly")
        wp.setflags(write=False)
        object.__setattr__(self, "waypoints", wp)

    @property
    def start(self) -> np.ndarray:
        return self.waypoints[0]

    @property
    def end(self) -> np.ndarray:
        return self.waypoints[-1]

    def segments(self) -> tuple[np.ndarray, np.ndarray]:
        """Return (starts, ends), each (n-1, 2)."""
        return self.waypoints[:-1], self.waypoints[1:]

    def length(self) -> float:
        return float(np.sum(np.linalg.norm(np.diff(self.waypoints, axis=0), axis=1)))

    def reverse(self) -> "Path":
        return Path(self.waypoints[::-1].copy(), closed=self.closed)

    @staticmethod
    def circle(center, radius, n_segments: int = 64, turns: int = 1) -> "Path":
        """Closed polygonal loop winding `turns` times around `center`.

        Negative turns wind clockwise. The polygon is closed exactly.
        """
        if turns == 0:
            raise ValueError("turns must be a nonzero integer")
        c = _as_points(center)
        total = n_segments * abs(turns)
        ang = np.linspace(0.0, TWO_PI * turns, total, endpoint=False)
        wp = np.empty((total + 1, 2))
        wp[:-1, 0] = c[0] + radius * np.cos(ang)
        wp[:-1, 1] = c[1] + radius * np.sin(ang)
        wp[-1] = wp[0]
        return Path(wp, closed=True)


def concatenate_paths(first: Path, second: Path) -> Path:
    """Join two paths; the second must start where the first ends."""
    if not np.array_equal(first.end, second.start):
        raise ValueError("paths do not share a junction waypoint")
    wp = np.vstack([first.waypoints, second.waypoints[1:]])
    closed = bool(np.array_equal(wp[0], wp[-1]))
    return Path(wp, closed=closed)


def winding_number(path: Path, about) -> int:
    """Signed number of times a closed path encircles `about` (ccw positive)."""
    if not path.closed:
        raise ValueError("winding number is defined for closed paths only")
    rel = path.waypoints - _as_points(about)
    ang = np.arctan2(rel[:, 1], rel[:, 0])
    dang = np.diff(ang)
    dang = (dang + np.pi) % TWO_PI - np.pi
    total = float(np.sum(dang))
    w = total / TWO_PI
    if abs(w - round(w)) > 1e-9:
        raise ValueError("path passes too close to the reference point for a winding count")
    return int(round(w))


# ---------------------------------------------------------------------------
# gauge generators


# probe geometry used to reject bad gauge generators at construction
_PROBE_SEGMENTS = np.array(
    [
        [[0.13, -0.42], [1.70, 0.90]],
        [[-2.10, 0.40], [0.60, -1.80]],
        [[3.00, 2.00], [-1.00, 0.55]],
    ]
)
_PROBE_LOOPS = (
    ((0.0, 0.0), 1.0),
    ((0.7, -0.3), 2.3),
    ((-1.4, 0.9), 0.6),
)


@dataclass(frozen=True)
class GaugeFunction:
    """Single-valued scalar gauge generator chi with analytic derivatives.

    grad must be the exact gradient of chi; hess (optional) is the Hessian,
    needed only when the gauged field has to expose an analytic A-Jacobian
    (e.g. for force evaluation). Construction probes both that grad matches
    chi along sample segments and that grad integrates to zero around sample
    loops; a multivalued generator (such as a polar angle) is rejected.
    """

    chi: Callable[[np.ndarray], np.ndarray]
    grad: Callable[[np.ndarray], np.ndarray]
    hess: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __post_init__(self):
        for center, radius in _PROBE_LOOPS:
            loop = Path.circle(center, radius, n_segments=32)
            s, e = loop.segments()
            vals = _segment_integrals(self.grad, s, e, 1e-9)
            scale = 1.0 + float(np.sum(np.abs(vals)))
            if abs(float(np.sum(vals))) > 1e-6 * scale:
                raise MultivaluedGaugeError(
                    "closed-loop integral of grad chi is nonzero; gauge generator must be single-valued"
                )
        starts, ends = _PROBE_SEGMENTS[:, 0], _PROBE_SEGMENTS[:, 1]
        seg = _segment_integrals(self.grad, starts, ends, 1e-9)
        dchi = np.asarray(self.chi(ends), float) - np.asarray(self.chi(starts), float)
        if not np.all(np.abs(seg - dchi) <= 1e-6 * (1.0 + np.abs(dchi))):
            raise ValueError("grad is not the gradient of chi (probe segments disagree)")


def constant_gauge(value: float) -> GaugeFunction:
    """chi = const; a gauge transformation that changes nothing."""
    v = float(value)
    return GaugeFunction(
        chi=lambda p: np.full(_as_points(p).shape[:-1], v),
        grad=lambda p: np.zeros_like(_as_points(p)),
        hess=lambda p: np.zeros(_as_points(p).shape[:-1] + (2, 2)),
    )


def linear_gauge(coefficients) -> GaugeFunction:
    """chi = c . r for a constant vector c."""
    c = _as_points(coefficients).copy()
    return GaugeFunction(
        chi=lambda p: _as_points(p) @ c,
        grad=lambda p: np.broadcast_to(c, _as_points(p).shape).copy(),
        hess=lambda p: np.zeros(_as_points(p).shape[:-1] + (2, 2)),
    )


def gaussian_gauge(amplitude: float, center, width: float) -> GaugeFunction:
    """chi = a exp(-|r - c|^2 / (2 w^2)), a smooth localized bump."""
    a = float(amplitude)
    c = _as_points(center).copy()
    w2 = float(width) ** 2
    if w2 <= 0.0:
        raise ValueError("width must be positive")

    def chi(p):
        rel = _as_points(p) - c
        return a * np.exp(-np.sum(rel * rel, axis=-1) / (2.0 * w2))

    def grad(p):
        rel = _as_points(p) - c
        return chi(p)[..., None] * (-rel / w2)

    def hess(p):
        rel = _as_points(p) - c
        outer = rel[..., :, None] * rel[..., None, :] / (w2 * w2)
        eye = np.eye(2) / w2
        return chi(p)[..., None, None] * (outer - eye)

    return GaugeFunction(chi=chi, grad=grad, hess=hess)


# ---------------------------------------------------------------------------
# potential fields


class PotentialField:
    """Static potential pair (A, phi) with analytic derivatives.

    Subclasses supply the vector potential A, its out-of-plane curl B, and
    the Jacobian dA_i/dx_j; scalar potential and its gradient default to zero
    (all shipped models are purely magnetic). Instances are immutable, so
    evaluation is safe from any number of concurrent callers.
    """

    def A(self, points) -> np.ndarray:
        raise NotImplementedError

    def B(self, points) -> np.ndarray:
        raise NotImplementedError

    def A_jacobian(self, points) -> np.ndarray:
        """J[..., i, j] = dA_i/dx_j, analytic."""
        raise NotImplementedError

    def phi(self, points) -> np.ndarray:
        return np.zeros(_as_points(points).shape[:-1])

    def phi_gradient(self, points) -> np.ndarray:
        return np.zeros(_as_points(points).shape)

    def A_divergence(self, points) -> np.ndarray:
        """div A from the analytic Jacobian (zero for every shipped gauge)."""
        jac = self.A_jacobian(points)
        return jac[..., 0, 0] + jac[..., 1, 1]


@dataclass(frozen=True)
class Solenoid(PotentialField):
    """Ideal infinite solenoid of radius R carrying total flux.

    Interior: uniform B = flux / (pi R^2), azimuthal A = flux r / (2 pi R^2).
    Exterior: B = 0 exactly while A = flux / (2 pi r) stays azimuthal.
    The two A branches agree at r = R, so A is continuous across the wall.
    """

    center: tuple[float, float]
    radius: float
    flux: float

    def __post_init__(self):
        if self.radius <= 0.0:
            raise ValueError("solenoid radius must be positive")
        object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))
        object.__setattr__(self, "radius", float(self.radius))
        object.__setattr__(self, "flux", float(self.flux))

    def _rel(self, points):
        return _as_points(points) - np.asarray(self.center)

    def A(self, points) -> np.ndarray:
        rel = self._rel(points)
        r2 = np.sum(rel * rel, axis=-1)
        inside = r2 < self.radius**2
        denom = np.where(inside, self.radius**2, np.where(r2 > 0.0, r2, 1.0))
        coef = self.flux / (TWO_PI * denom)
        out = np.empty_like(rel)
        out[..., 0] = -coef * rel[..., 1]
        out[..., 1] = coef * rel[..., 0]
        return out

    def B(self, points) -> np.ndarray:
        rel = self._rel(points)
        r2 = np.sum(rel * rel, axis=-1)
        b_in = self.flux / (np.pi * self.radius**2)
        return np.where(r2 < self.radius**2, b_in, 0.0)

    def A_jacobian(self, points) -> np.ndarray:
        rel = self._rel(points)
        x, y = rel[..., 0], rel[..., 1]
        r2 = x * x + y * y
        inside = r2 < self.radius**2
        jac = np.empty(rel.shape[:-1] + (2, 2))
        # interior: A = c (-y, x) with constant c
        c_in = self.flux / (TWO_PI * self.radius**2)
        # exterior: A = c (-y, x)/r^2
        r2safe = np.where(r2 > 0.0, r2, 1.0)
        c_ex = self.flux / (TWO_PI * r2safe)
        jac[..., 0, 0] = np.where(inside, 0.0, c_ex * 2.0 * x * y / r2safe)
        jac[..., 0, 1] = np.where(inside, -c_in, c_ex * (-1.0 + 2.0 * y * y / r2safe))
        jac[..., 1, 0] = np.where(inside, c_in, c_ex * (1.0 - 2.0 * x * x / r2safe))
        jac[..., 1, 1] = np.where(inside, 0.0, -c_ex * 2.0 * x * y / r2safe)
        return jac


@dataclass(frozen=True)
class FluxLine(PotentialField):
    """Zero-radius flux filament: B = 0 everywhere off the axis, A azimuthal.

    The axis point itself is singular and raises on evaluation.
    """

    center: tuple[float, float]
    flux: float

    def __post_init__(self):
        object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))
        object.__setattr__(self, "flux", float(self.flux))

    def _rel_checked(self, points):
        rel = _as_points(points) - np.asarray(self.center)
        if np.any(np.sum(rel * rel, axis=-1) == 0.0):
            raise SingularPointError("flux line potential evaluated on its axis")
        return rel

    def A(self, points) -> np.ndarray:
        rel = self._rel_checked(points)
        coef = self.flux / (TWO_PI * np.sum(rel * rel, axis=-1))
        out = np.empty_like(rel)
        out[..., 0] = -coef * rel[..., 1]
        out[..., 1] = coef * rel[..., 0]
        return out

    def B(self, points) -> np.ndarray:
        rel = self._rel_checked(points)
        return np.zeros(rel.shape[:-1])

    def A_jacobian(self, points) -> np.ndarray:
        rel = self._rel_checked(points)
        x, y = rel[..., 0], rel[..., 1]
        r2 = x * x + y * y
        c = self.flux / (TWO_PI * r2)
        jac = np.empty(rel.shape[:-1] + (2, 2))
        jac[..., 0, 0] = c * 2.0 * x * y / r2
        jac[..., 0, 1] = c * (-1.0 + 2.0 * y * y / r2)
        jac[..., 1, 0] = c * (1.0 - 2.0 * x * x / r2)
        jac[..., 1, 1] = -c * 2.0 * x * y / r2
        return jac


@dataclass(frozen=True)
class UniformB(PotentialField):
    """Uniform out-of-plane field in the symmetric gauge A = B/2 (-y, x)."""

    strength: float
    center: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        object.__setattr__(self, "strength", float(self.strength))
        object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))

    def A(self, points) -> np.ndarray:
        rel = _as_points(points) - np.asarray(self.center)
        out = np.empty_like(rel)
        out[..., 0] = -0.5 * self.strength * rel[..., 1]
        out[..., 1] = 0.5 * self.strength * rel[..., 0]
        return out

    def B(self, points) -> np.ndarray:
        return np.full(_as_points(points).shape[:-1], self.strength)

    def A_jacobian(self, points) -> np.ndarray:
        p = _as_points(points)
        jac = np.zeros(p.shape[:-1] + (2, 2))
        jac[..., 0, 1] = -0.5 * self.strength
        jac[..., 1, 0] = 0.5 * self.strength
        return jac


@dataclass(frozen=True)
class GaugedField(PotentialField):
    """Wrapper applying A -> A + grad chi while leaving phi and B untouched."""

    base: PotentialField
    gauge: GaugeFunction

    def A(self, points) -> np.ndarray:
        return self.base.A(points) + self.gauge.grad(points)

    def B(self, points) -> np.ndarray:
        # curl grad chi = 0 identically, so curl is the base field's
        return self.base.B(points)

    def A_jacobian(self, points) -> np.ndarray:
        if self.gauge.hess is None:
            raise ValueError("gauged-field Jacobian needs the gauge generator's Hessian")
        return self.base.A_jacobian(points) + self.gauge.hess(points)

    def phi(self, points) -> np.ndarray:
        return self.base.phi(points)

    def phi_gradient(self, points) -> np.ndarray:
        return self.base.phi_gradient(points)


def apply_gauge(field: PotentialField, gauge: GaugeFunction) -> GaugedField:
    """Return the gauge-transformed field A' = A + grad chi, phi' = phi."""
    return GaugedField(field, gauge)


def numeric_curl(field: PotentialField, point, h: float) -> float:
    """Central-difference curl of A; a validation oracle for the analytic B."""
    p = _as_points(point)
    if p.shape != (2,):
        raise ValueError("numeric_curl expects a single point")
    ex = np.array([h, 0.0])
    ey = np.array([0.0, h])
    day_dx = (field.A(p + ex)[1] - field.A(p - ex)[1]) / (2.0 * h)
    dax_dy = (field.A(p + ey)[0] - field.A(p - ey)[0]) / (2.0 * h)
    return float(day_dx - dax_dy)


# ---------------------------------------------------------------------------
# adaptive line integrals


def _segment_integrals(
    vector_func: Callable[[np.ndarray], np.ndarray],
    starts,
    ends,
    rtol: float,
    max_depth: int = MAX_QUAD_DEPTH,
) -> np.ndarray:
    """Integral of F . dr along each straight segment, adaptively refined.

    Vectorized over segments: every bisection level evaluates the field once
    on the batch of all still-active midpoints. Each segment is refined until
    its Simpson error estimate falls below a tolerance proportional to rtol
    (halved on every split so accepted errors stay summable); intervals still
    active at `max_depth` raise QuadratureError carrying the best per-segment
    estimates and the summed error bound.
    """
    a = np.atleast_2d(np.asarray(starts, float))
    b = np.atleast_2d(np.asarray(ends, float))
    if a.shape != b.shape or a.shape[-1] != 2:
        raise ValueError("starts/ends must both have shape (n, 2)")
    n = a.shape[0]
    d = b - a

    def g(seg, t):
        pts = a[seg] + t[:, None] * d[seg]
        vals = np.asarray(vector_func(pts), float)
        return np.einsum("ij,ij->i", vals, d[seg])

    seg0 = np.arange(n)
    t_all = np.concatenate([np.zeros(n), np.full(n, 0.5), np.ones(n)])
    f_all = g(np.concatenate([seg0, seg0, seg0]), t_all)
    f_lo, f_mid, f_hi = f_all[:n], f_all[n : 2 * n], f_all[2 * n :]
    s_est = (f_lo + 4.0 * f_mid + f_hi) / 6.0

    # per-segment absolute tolerance: relative to the segment's own scale,
    # floored by a fraction of the largest segment so near-zero segments
    # cannot demand unbounded refinement
    floor = 1e-3 * float(np.max(np.abs(s_est), initial=0.0))
    itol = rtol * (np.abs(s_est) + floor + 1e-30)

    totals = np.zeros(n)
    seg, t_lo, width = seg0, np.zeros(n), np.ones(n)

    for depth in range(max_depth + 1):
        if seg.size == 0:
            return totals
        m = seg.size
        f_new = g(
            np.concatenate([seg, seg]),
            np.concatenate([t_lo + 0.25 * width, t_lo + 0.75 * width]),
        )
        f_lm, f_rm = f_new[:m], f_new[m:]
        half = 0.5 * width
        s_left = half * (f_lo + 4.0 * f_lm + f_mid) / 6.0
        s_right = half * (f_mid + 4.0 * f_rm + f_hi) / 6.0
        err15 = s_left + s_right - s_est
        refined = s_left + s_right + err15 / 15.0
        done = np.abs(err15) <= 15.0 * itol
        if depth == max_depth and not np.all(done):
            bad = ~done
            np.add.at(totals, seg, refined)
            raise QuadratureError(
                f"line integral not converged on {int(bad.sum())} subinterval(s) "
                f"at refinement depth {max_depth}",
                best_estimate=totals if n > 1 else float(totals[0]),
                error_bound=float(np.sum(np.abs(err15[bad])) / 15.0),
            )
        np.add.at(totals, seg[done], refined[done])
        keep = ~done
        seg = np.tile(seg[keep], 2)
        t_lo = np.concatenate([t_lo[keep], t_lo[keep] + half[keep]])
        width = np.tile(half[keep], 2)
        f_lo, f_mid, f_hi = (
            np.concatenate([f_lo[keep], f_mid[keep]]),
            np.concatenate([f_lm[keep], f_rm[keep]]),
            np.concatenate([f_mid[keep], f_hi[keep]]),
        )
        s_est = np.concatenate([s_left[keep], s_right[keep]])
        itol = np.tile(0.5 * itol[keep], 2)
    return totals


def segment_line_integrals(
    field: PotentialField, starts, ends, tol: float = DEFAULT_QUAD_TOL
) -> np.ndarray:
    """Per-segment integral of A . dr over a batch of straight segments."""
    return _segment_integrals(field.A, starts, ends, tol)


def line_integral_A(field: PotentialField, path: Path, tol: float = DEFAULT_QUAD_TOL) -> float:
    """Adaptive quadrature of A . dr along a piecewise-linear path.

    For a closed path around a solenoid this converges to the enclosed flux
    times the winding number; tol is relative to each segment's scale.
    """
    starts, ends = path.segments()
    try:
        return float(np.sum(_segment_integrals(field.A, starts, ends, tol)))
    except QuadratureError as err:
        best = err.best_estimate
        total = float(np.sum(best)) if best is not None else float("nan")
        raise QuadratureError(str(err), best_estimate=total, error_bound=err.error_bound) from None
