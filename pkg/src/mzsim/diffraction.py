"""Scalar Huygens-Fresnel profiles for one or two 1-D slits.

The screen amplitude is the line integral

    U(x) = sum over open slits of  integral exp(i k r) / sqrt(r) dxi,
    r = sqrt(z**2 + (x - xi)**2),

evaluated with composite Simpson quadrature. Node counts double until the
profile changes by less than 0.1% of its peak.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.signal import find_peaks

from .engine import PropagationModel
from .optics import C

MIN_NODES = 2001
MAX_DOUBLINGS = 6
CONVERGENCE_TOL = 1e-3


class DiffractionError(ValueError):
    pass


class AccuracyError(DiffractionError):
    pass


class ClassificationError(DiffractionError):
    pass


class Regime(str, enum.Enum):
    NEAR_TWO_LINES = "near_two_lines"
    MID_ENVELOPE = "mid_envelope"
    FAR_FRINGES = "far_fringes"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class SlitGeometry:
    d: float = 0.6e-3
    a: float = 0.1e-3
    wavelength: float = 633e-9
    open_slits: frozenset = frozenset({1, 2})

    def __post_init__(self):
        object.__setattr__(self, "open_slits", frozenset(self.open_slits))
        if not self.a > 0:
            raise DiffractionError("slit width must be > 0")
        if not self.d > self.a:
            raise DiffractionError("slit separation must exceed slit width")
        if not self.wavelength > 0:
            raise DiffractionError("wavelength must be > 0")
        if not self.open_slits <= {1, 2}:
            raise DiffractionError("open_slits must be a subset of {1, 2}")

    def centre(self, slit: int) -> float:
        return -self.d / 2 if slit == 1 else self.d / 2

    @property
    def k(self) -> float:
        return 2 * math.pi / self.wavelength

    def far_field_spacing(self, z: float) -> float:
        return self.wavelength * z / self.d

    def with_slits(self, *slits: int) -> "SlitGeometry":
        return replace(self, open_slits=frozenset(slits))


@dataclass(frozen=True)
class ScreenGrid:
    """Uniform screen sampling, exactly symmetric about x = 0."""

    half_width: float
    n_points: int = 2001

    def __post_init__(self):
        if not self.half_width > 0:
            raise DiffractionError("half_width must be > 0")
        if self.n_points < 3 or self.n_points % 2 == 0:
            raise DiffractionError("n_points must be odd and >= 3")

    @property
    def xs(self) -> np.ndarray:
        m = self.n_points // 2
        return (self.half_width / m) * np.arange(-m, m + 1)

    @classmethod
    def default(cls, geom: SlitGeometry, z: float, n_points: int = 2001) -> "ScreenGrid":
        # both slit images plus 1.5 widths of the single-slit envelope
        return cls(geom.d / 2 + geom.a + 1.5 * geom.wavelength * z / geom.a, n_points)


@dataclass(frozen=True)
class ScreenProfile:
    z: float
    xs: np.ndarray
    intensity: np.ndarray
    nodes: int = 0
    convergence: float = 0.0  # peak-relative change on the last node doubling
    open_slits: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        for name in ("xs", "intensity"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)


def simpson_weights(nodes: int, h: float) -> np.ndarray:
    """Composite Simpson weights h/3 * [1, 4, 2, 4, ..., 4, 1] for an odd node count."""
    if nodes < 3 or nodes % 2 == 0:
        raise DiffractionError("Simpson quadrature needs an odd node count >= 3")
    w = np.full(nodes, 2.0)
    w[1::2] = 4.0
    w[0] = w[-1] = 1.0
    return w * (h / 3.0)


def _slit_nodes(geom: SlitGeometry, slit: int, nodes: int) -> np.ndarray:
    xi = -geom.d / 2 + geom.a * np.linspace(-0.5, 0.5, nodes)
    # slit 2 is the exact mirror image of slit 1
    return xi if slit == 1 else -xi[::-1]


def _slit_integrals(geom: SlitGeometry, slit: int, z: float, xs: np.ndarray,
                    nodes: int, with_coarse: bool) -> tuple[np.ndarray, np.ndarray | None]:
    """Simpson integrals on ``nodes`` points and, optionally, on every other one."""
    if not z > 0:
        raise DiffractionError("z must be > 0")
    xs = np.asarray(xs, dtype=float)
    xi = _slit_nodes(geom, slit, nodes)
    h = geom.a / (nodes - 1)
    w_fine = simpson_weights(nodes, h)
    w_coarse = simpson_weights((nodes + 1) // 2, 2 * h) if with_coarse else None
    fine = np.empty(xs.shape, dtype=complex)
    coarse = np.empty(xs.shape, dtype=complex) if with_coarse else None
    chunk = max(1, 4_000_000 // nodes)
    for lo in range(0, xs.size, chunk):
        sl = slice(lo, lo + chunk)
        r = xs[sl, None] - xi[None, :]
        r *= r
        r += z * z
        np.sqrt(r, out=r)
        amp = r ** -0.5
        r *= geom.k
        re = np.cos(r) * amp
        im = np.sin(r, out=r) * amp
        fine[sl] = re @ w_fine + 1j * (im @ w_fine)
        if with_coarse:
            coarse[sl] = re[:, ::2] @ w_coarse + 1j * (im[:, ::2] @ w_coarse)
    return fine, coarse


@functools.lru_cache(maxsize=128)
def _grid_integrals(d: float, a: float, wavelength: float, slit: int, z: float,
                    grid: "ScreenGrid", nodes: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-slit integrals on a symmetric screen grid, shared between slit sets."""
    if slit == 2:
        fine, coarse = _grid_integrals(d, a, wavelength, 1, z, grid, nodes)
        return fine[::-1], coarse[::-1]
    geom = SlitGeometry(d, a, wavelength)
    fine, coarse = _slit_integrals(geom, 1, z, grid.xs, nodes, with_coarse=True)
    fine.setflags(write=False)
    coarse.setflags(write=False)
    return fine, coarse


def slit_field(geom: SlitGeometry, slit: int, z: float, xs: np.ndarray, nodes: int = MIN_NODES) -> np.ndarray:
    """Complex screen amplitude from a single slit, at fixed node count."""
    return _slit_integrals(geom, slit, z, xs, nodes, with_coarse=False)[0]


def aperture_field(geom: SlitGeometry, z: float, xs: np.ndarray, nodes: int = MIN_NODES) -> np.ndarray:
    """Sum of the single-slit amplitudes of every open slit."""
    total = np.zeros(np.shape(xs), dtype=complex)
    for slit in sorted(geom.open_slits):
        total = total + slit_field(geom, slit, z, xs, nodes)
    return total


@functools.lru_cache(maxsize=64)
def _converged_profile(geom: SlitGeometry, z: float, grid: ScreenGrid, min_nodes: int) -> ScreenProfile:
    xs = grid.xs
    nodes = min_nodes
    for _ in range(MAX_DOUBLINGS):
        finer = 2 * nodes - 1
        fine = np.zeros(xs.shape, dtype=complex)
        coarse = np.zeros(xs.shape, dtype=complex)
        for slit in sorted(geom.open_slits):
            f, c = _grid_integrals(geom.d, geom.a, geom.wavelength, slit, z, grid, finer)
            fine, coarse = fine + f, coarse + c
        refined, intensity = np.abs(fine) ** 2, np.abs(coarse) ** 2
        peak = max(float(intensity.max()), np.finfo(float).tiny)
        change = float(np.abs(refined - intensity).max()) / peak
        nodes = finer
        if change < CONVERGENCE_TOL:
            return ScreenProfile(z, xs, refined, nodes, change, geom.open_slits)
    raise AccuracyError(f"quadrature did not converge at z={z:g} m after {MAX_DOUBLINGS} doublings")


def slit_pattern(geom: SlitGeometry, z: float, grid: ScreenGrid | None = None,
                 min_nodes: int = MIN_NODES) -> ScreenProfile:
    """Screen intensity for the open slits of ``geom`` at distance ``z``.

    The returned profile uses the doubled node count that passed the
    convergence check.
    """
    if not (math.isfinite(z) and z > 0):
        raise DiffractionError("z must be > 0")
    if not geom.open_slits:
        raise DiffractionError("no open slit")
    if grid is None:
        grid = ScreenGrid.default(geom, z)
    return _converged_profile(geom, float(z), grid, int(min_nodes))


def _refined_peaks(xs: np.ndarray, y: np.ndarray, idx: np.ndarray) -> np.ndarray:
    """Sub-grid peak positions from a 3-point parabola through each maximum."""
    idx = idx[(idx > 0) & (idx < len(y) - 1)]
    y0, y1, y2 = y[idx - 1], y[idx], y[idx + 1]
    denom = y0 - 2 * y1 + y2
    with np.errstate(invalid="ignore", divide="ignore"):
        shift = np.where(denom != 0, 0.5 * (y0 - y2) / denom, 0.0)
    step = xs[1] - xs[0]
    return xs[idx] + np.clip(shift, -0.5, 0.5) * step


def fringe_maxima(profile: ScreenProfile, floor: float = 0.1) -> np.ndarray:
    """Refined positions of local maxima above ``floor`` times the peak."""
    y = profile.intensity
    idx, _ = find_peaks(y, height=floor * float(y.max()))
    return _refined_peaks(profile.xs, y, idx)


def bright_lobes(profile: ScreenProfile, level: float = 0.5) -> np.ndarray:
    """Peak position of each contiguous region above ``level`` times the peak."""
    y = profile.intensity
    above = y > level * float(y.max())
    edges = np.flatnonzero(np.diff(above.astype(int)))
    starts = list(edges[~above[edges]] + 1)
    ends = list(edges[above[edges]] + 1)
    if above[0]:
        starts.insert(0, 0)
    if above[-1]:
        ends.append(len(y))
    peaks = [s + int(np.argmax(y[s:e])) for s, e in zip(starts, ends)]
    return _refined_peaks(profile.xs, y, np.array(peaks, dtype=int)) if peaks else np.array([])


@dataclass(frozen=True)
class RegimeThresholds:
    lobe_level: float = 0.5
    separation_tol: float = 0.20
    fringe_floor: float = 0.1
    min_fringes: int = 5
    spacing_tol: float = 0.10


@dataclass(frozen=True)
class RegimeReport:
    regime: Regime
    n_lobes: int
    n_maxima: int
    lobe_positions: tuple[float, ...]
    median_spacing: float | None


def classify_regime(profile: ScreenProfile, geom: SlitGeometry,
                    thresholds: RegimeThresholds = RegimeThresholds()) -> RegimeReport:
    """Label a two-slit profile as two lines, a single envelope, or fringes."""
    y = profile.intensity
    peak = float(y.max())
    if peak <= 0 or float(y.max() - y.min()) <= 1e-12 * peak:
        raise ClassificationError("degenerate flat profile")
    lobes = bright_lobes(profile, thresholds.lobe_level)
    maxima = fringe_maxima(profile, thresholds.fringe_floor)
    spacings = np.diff(maxima)
    median = float(np.median(spacings)) if spacings.size else None

    if lobes.size == 2 and abs((lobes[1] - lobes[0]) - geom.d) <= thresholds.separation_tol * geom.d:
        regime = Regime.NEAR_TWO_LINES
    elif maxima.size >= thresholds.min_fringes and np.all(
            np.abs(spacings - geom.far_field_spacing(profile.z))
            <= thresholds.spacing_tol * geom.far_field_spacing(profile.z)):
        regime = Regime.FAR_FRINGES
    else:
        regime = Regime.MID_ENVELOPE
    return RegimeReport(regime, int(lobes.size), int(maxima.size), tuple(float(v) for v in lobes), median)


def fringe_spacing(profile: ScreenProfile, floor: float = 0.1) -> float:
    """Median spacing between adjacent maxima above ``floor`` of the peak."""
    maxima = fringe_maxima(profile, floor)
    if maxima.size < 3:
        raise DiffractionError(f"insufficient maxima ({maxima.size}) for a fringe spacing")
    return float(np.median(np.diff(maxima)))


def default_switch(geom: SlitGeometry) -> frozenset:
    """Slits open after the switch: close slit 2 if both are open, else open both."""
    return frozenset({1}) if geom.open_slits == {1, 2} else frozenset({1, 2})


def front_arrival(z: float, t_switch: float, model) -> float:
    """Time at which a slit change first shows on the screen."""
    model = PropagationModel(model)
    return t_switch + z / C if model is PropagationModel.LOCAL else t_switch


def transient_transform(geom: SlitGeometry, z: float, t_switch: float, t: float, model,
                        after: frozenset | set | None = None, grid: ScreenGrid | None = None) -> ScreenProfile:
    """Screen profile at time ``t`` when the open slits change at ``t_switch``.

    Local model: the old pattern persists until ``t_switch + z/c`` and then
    switches sharply. Nonlocal model: the new pattern from ``t_switch`` on.
    """
    after_geom = replace(geom, open_slits=frozenset(after) if after is not None else default_switch(geom))
    if grid is None:
        grid = ScreenGrid.default(geom, z)
    current = after_geom if t >= front_arrival(z, t_switch, model) else geom
    return slit_pattern(current, z, grid)
