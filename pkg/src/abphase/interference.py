"""Two-path interferometer: geometry, fringe prediction, shift measurement.

A point source feeds two slits; a shielded solenoid sits between the slits
so the interfering routes enclose its flux without ever entering the field
region. Outside the solenoid trajectories are straight (B = 0), so the
default prediction uses straight rays; an integrate mode re-derives each
arm's phase from explicit Hamiltonian trajectories as a cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .action import EikonalReport, accumulate_action, phase_shift
from .dynamics import ParticleParams, ParticleState, canonical_momentum, integrate
from .errors import DegeneratePatternError, GeometryError, GridMismatchError
from .fields import DEFAULT_QUAD_TOL, Path, PotentialField, Solenoid

#: required clearance between any classical path and the solenoid disc,
#: as a fraction of the solenoid radius
CLEARANCE_FRACTION = 0.1


def _point_segment_distance(p, a, b) -> float:
    p, a, b = (np.asarray(v, float) for v in (p, a, b))
    d = b - a
    denom = float(d @ d)
    t = 0.0 if denom == 0.0 else float(np.clip((p - a) @ d / denom, 0.0, 1.0))
    return float(np.linalg.norm(p - (a + t * d)))


def _point_triangle_distance(p, a, b, c) -> float:
    """Distance from p to the filled triangle abc (zero inside)."""
    p, a, b, c = (np.asarray(v, float) for v in (p, a, b, c))
    s1 = np.cross(b - a, p - a)
    s2 = np.cross(c - b, p - b)
    s3 = np.cross(a - c, p - c)
    if (s1 >= 0 and s2 >= 0 and s3 >= 0) or (s1 <= 0 and s2 <= 0 and s3 <= 0):
        return 0.0
    return min(
        _point_segment_distance(p, a, b),
        _point_segment_distance(p, b, c),
        _point_segment_distance(p, c, a),
    )


@dataclass(frozen=True)
class TwoPathSetup:
    """Source / double slit / screen geometry with a shielded solenoid.

    The solenoid disc must clear every classical route by at least 10% of
    its radius; this is checked over the whole screen fan at construction.
    """

    source: np.ndarray
    slit_separation: float
    slit_plane_x: float
    screen_x: float
    screen_extent: float
    solenoid: Solenoid
    particle: ParticleParams
    speed: float

    def __post_init__(self):
        src = np.array(self.source, dtype=float)
        if src.shape != (2,):
            raise GeometryError("source must be a planar point")
        src.setflags(write=False)
        object.__setattr__(self, "source", src)
        if self.slit_separation <= 0.0:
            raise GeometryError("slit separation must be positive")
        if self.screen_extent <= 0.0:
            raise GeometryError("screen extent must be positive")
        if self.speed <= 0.0:
            raise GeometryError("particle speed must be positive")
        if not (src[0] < self.slit_plane_x < self.screen_x):
            raise GeometryError("require source.x < slit_plane_x < screen_x")

        center = np.asarray(self.solenoid.center)
        clear = self.solenoid.radius * (1.0 + CLEARANCE_FRACTION)
        for name, slit in (("upper", self.slit_upper), ("lower", self.slit_lower)):
            if _point_segment_distance(center, src, slit) < clear:
                raise GeometryError(f"source to {name}-slit segment clips the solenoid disc")
            lo = np.array([self.screen_x, -self.screen_extent])
            hi = np.array([self.screen_x, self.screen_extent])
            if _point_triangle_distance(center, slit, lo, hi) < clear:
                raise GeometryError(f"{name}-slit screen fan clips the solenoid disc")

    @property
    def slit_upper(self) -> np.ndarray:
        return np.array([self.slit_plane_x, 0.5 * self.slit_separation])

    @property
    def slit_lower(self) -> np.ndarray:
        return np.array([self.slit_plane_x, -0.5 * self.slit_separation])

    @property
    def wavenumber(self) -> float:
        """|k| = m v / hbar for the nominal beam speed."""
        return self.particle.m * self.speed / self.particle.hbar

    @property
    def wavelength(self) -> float:
        return 2.0 * np.pi / self.wavenumber

    @property
    def nominal_fringe_period(self) -> float:
        """Small-angle fringe spacing lambda D / d at the screen."""
        return self.wavelength * (self.screen_x - self.slit_plane_x) / self.slit_separation

    @property
    def ab_phase(self) -> float:
        """q Phi / hbar, the flux-induced interference phase."""
        return self.particle.q * self.solenoid.flux / self.particle.hbar


@dataclass(frozen=True)
class FringePattern:
    """Screen intensity samples, normalized to unit maximum."""

    screen_y: np.ndarray
    intensity: np.ndarray
    fringe_period: float
    ab_phase: Optional[float] = None
    eikonal: Optional[EikonalReport] = None

    def __post_init__(self):
        y = np.asarray(self.screen_y, float)
        i = np.asarray(self.intensity, float)
        if y.ndim != 1 or y.shape != i.shape:
            raise ValueError("screen_y and intensity must be matching 1-D arrays")
        if np.any(i < 0.0):
            raise ValueError("intensity must be nonnegative")
        if abs(float(np.max(i, initial=0.0)) - 1.0) > 1e-9:
            raise ValueError("intensity must be normalized to unit maximum")
        for arr in (y, i):
            arr.setflags(write=False)
        object.__setattr__(self, "screen_y", y)
        object.__setattr__(self, "intensity", i)


def build_paths(setup: TwoPathSetup, screen_y: float = 0.0) -> tuple[Path, Path]:
    """Straight two-leg routes source -> slit -> screen point (upper, lower)."""
    if abs(screen_y) > setup.screen_extent:
        raise GeometryError("screen point lies outside the screen extent")
    target = np.array([setup.screen_x, float(screen_y)])
    center = np.asarray(setup.solenoid.center)
    clear = setup.solenoid.radius * (1.0 + CLEARANCE_FRACTION)
    paths = []
    for name, slit in (("upper", setup.slit_upper), ("lower", setup.slit_lower)):
        for leg, a, b in (("approach", setup.source, slit), ("screen", slit, target)):
            if _point_segment_distance(center, a, b) < clear:
                raise GeometryError(f"{name}-slit {leg} leg clips the solenoid disc")
        paths.append(Path(np.vstack([setup.source, slit, target])))
    return paths[0], paths[1]


def _arm_lengths(setup: TwoPathSetup, ys: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    dx = setup.screen_x - setup.slit_plane_x
    half = 0.5 * setup.slit_separation
    base_u = float(np.linalg.norm(setup.slit_upper - setup.source))
    base_l = float(np.linalg.norm(setup.slit_lower - setup.source))
    return (
        base_u + np.hypot(dx, ys - half),
        base_l + np.hypot(dx, ys + half),
    )


def _arm_phase_integrated(
    setup: TwoPathSetup, field: PotentialField, slit: np.ndarray, target: np.ndarray, steps_per_leg: int
) -> float:
    """Arm phase from explicit trajectories: int P . dr / hbar over both legs.

    For a fixed-energy beam the interference phase of an arm is the
    abbreviated action int P . dr = 2 S_kinetic + S_interaction.
    """
    par = setup.particle
    total = 0.0
    for a, b in ((setup.source, slit), (slit, target)):
        leg = np.asarray(b, float) - np.asarray(a, float)
        length = float(np.linalg.norm(leg))
        v0 = setup.speed * leg / length
        p0 = canonical_momentum(v0, a, par, field)
        traj = integrate(
            ParticleState(0.0, a, p0), par, field, length / setup.speed, dt=length / setup.speed / steps_per_leg
        )
        acc = accumulate_action(traj, field)
        total += (2.0 * acc.kinetic + acc.interaction) / par.hbar
    return total


def classical_fringes(
    setup: TwoPathSetup,
    n_samples: int,
    mode: str = "ray",
    field: Optional[PotentialField] = None,
    eikonal_threshold: float = 100.0,
    quad_tol: float = DEFAULT_QUAD_TOL,
    steps_per_leg: int = 200,
) -> FringePattern:
    """Predict the screen pattern cos^2((geometric + flux phase)/2).

    The flux term is the two-path interference phase at the screen center;
    it is the same for every screen point because the field vanishes outside
    the solenoid. `mode="integrate"` rebuilds each arm phase from Hamiltonian
    trajectories instead of straight-ray lengths (slow; cross-check only).
    `field` overrides the setup's solenoid, e.g. with a gauged wrapper.
    """
    if n_samples < 16:
        raise ValueError("need at least 16 screen samples")
    if mode not in ("ray", "integrate"):
        raise ValueError(f"unknown mode {mode!r}")
    field = setup.solenoid if field is None else field
    par = setup.particle
    ys = np.linspace(-setup.screen_extent, setup.screen_extent, n_samples)

    if mode == "ray":
        upper0, lower0 = build_paths(setup, 0.0)
        flux_phase = phase_shift(upper0, lower0, field, par.q, par.hbar, tol=quad_tol)
        lu, ll = _arm_lengths(setup, ys)
        delta = setup.wavenumber * (lu - ll) + flux_phase
    else:
        delta = np.empty(n_samples)
        for i, y in enumerate(ys):
            target = np.array([setup.screen_x, y])
            build_paths(setup, y)  # clearance check
            phi_u = _arm_phase_integrated(setup, field, setup.slit_upper, target, steps_per_leg)
            phi_l = _arm_phase_integrated(setup, field, setup.slit_lower, target, steps_per_leg)
            delta[i] = phi_u - phi_l

    intensity = np.cos(0.5 * delta) ** 2
    intensity = intensity / float(np.max(intensity))

    k_vec = np.array([setup.wavenumber, 0.0])
    from .action import WaveParameters, eikonal_check  # local import avoids cycle at module load

    wp = WaveParameters(
        omega=0.5 * par.m * setup.speed**2 / par.hbar, k=k_vec, wavelength=setup.wavelength
    )
    report = eikonal_check(wp, setup.slit_separation, eikonal_threshold)

    return FringePattern(
        screen_y=ys,
        intensity=intensity,
        fringe_period=setup.nominal_fringe_period,
        ab_phase=setup.ab_phase,
        eikonal=report,
    )


def _normalized_correlation(a: np.ndarray, b: np.ndarray, lag: int) -> float:
    """Pearson correlation of a[j] against b[j - lag] over the overlap."""
    n = a.size
    wa = a[max(0, lag) : n + min(0, lag)]
    wb = b[max(0, -lag) : n + min(0, -lag)]
    wa = wa - wa.mean()
    wb = wb - wb.mean()
    denom = np.linalg.norm(wa) * np.linalg.norm(wb)
    if denom == 0.0:
        return 0.0
    return float(wa @ wb / denom)


def wrap_shift(s: float) -> float:
    """Wrap a shift in fringe periods into [-0.5, 0.5)."""
    return float((s + 0.5) % 1.0 - 0.5)


def fringe_shift(pattern: FringePattern, reference: FringePattern) -> float:
    """Displacement of `pattern` relative to `reference` in fringe periods.

    Located by maximizing the normalized cross-correlation over integer
    sample lags, then refined with a quadratic fit around the peak; the
    result is wrapped into [-0.5, 0.5). Sign convention: the shift is
    measured along the direction a positive enclosed flux (times positive
    charge) displaces the pattern, i.e. a positive value means displacement
    toward negative screen coordinates; with that orientation the measured
    shift of a flux-threaded interferometer equals (q Phi / hbar) / 2 pi
    mod 1.
    """
    if not np.array_equal(pattern.screen_y, reference.screen_y):
        raise GridMismatchError("patterns are sampled on different screen grids")
    ip = np.asarray(pattern.intensity, float)
    ir = np.asarray(reference.intensity, float)
    if float(np.ptp(ip)) < 1e-12 or float(np.ptp(ir)) < 1e-12:
        raise DegeneratePatternError("flat intensity pattern has no measurable shift")

    n = ip.size
    dy = float(pattern.screen_y[1] - pattern.screen_y[0])
    period = float(pattern.fringe_period)
    if not np.isfinite(period) or period <= 0.0:
        raise ValueError("pattern carries no usable fringe period")

    max_lag = min(n - 8, int(np.ceil(1.25 * period / dy)) + 2)
    if max_lag < 1:
        raise ValueError("screen grid too coarse relative to the fringe period")
    lags = np.arange(-max_lag, max_lag + 1)
    ncc = np.array([_normalized_correlation(ip, ir, int(l)) for l in lags])

    kk = int(np.argmax(ncc))
    offset = 0.0
    if 0 < kk < lags.size - 1:
        y_m, y_0, y_p = ncc[kk - 1], ncc[kk], ncc[kk + 1]
        denom = y_m - 2.0 * y_0 + y_p
        if denom < 0.0:
            offset = 0.5 * (y_m - y_p) / denom
    displacement = (float(lags[kk]) + offset) * dy

    return wrap_shift(-displacement / period)


def estimate_fringe_period(screen_y: np.ndarray, intensity: np.ndarray) -> float:
    """Dominant fringe spacing from the intensity spectrum (parabolic refine).

    Used when a pattern is rebuilt from a bare CSV and no period metadata
    survives.
    """
    y = np.asarray(screen_y, float)
    sig = np.asarray(intensity, float)
    sig = sig - sig.mean()
    if float(np.ptp(sig)) < 1e-12:
        raise DegeneratePatternError("flat intensity pattern has no fringe period")
    window = np.hanning(sig.size)
    spec = np.abs(np.fft.rfft(sig * window))
    spec[0] = 0.0
    kk = int(np.argmax(spec))
    if kk == 0 or kk >= spec.size - 1:
        raise DegeneratePatternError("no interior spectral peak found")
    y_m, y_0, y_p = spec[kk - 1], spec[kk], spec[kk + 1]
    denom = y_m - 2.0 * y_0 + y_p
    offset = 0.5 * (y_m - y_p) / denom if denom < 0.0 else 0.0
    freq = (kk + offset) / (y[-1] - y[0] + (y[1] - y[0]))
    return float(1.0 / freq)
