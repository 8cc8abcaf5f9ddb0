"""Observables that separate revival (jumps survive) from fractalisation."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .numbers import ThetaValue
from .spectral import SQRT_2PI, GridProfile, SpectralState

# directions used for the width of a complex point cloud; the widest
# projection underestimates the diameter by at most a factor cos(pi/128)
_DIRECTIONS = np.exp(-1j * np.pi * np.arange(64) / 64)


@dataclass(frozen=True)
class OscillationReport:
    center: float
    radii: tuple[float, ...]
    oscillation: tuple[float, ...]
    verdict: str        # "jump-persists" | "decays"
    part: str

    @property
    def decay_factor(self) -> float:
        small = self.oscillation[-1]
        return math.inf if small == 0 else self.oscillation[0] / small

    def persists_above(self, jump: float, floor: float = 0.9) -> bool:
        return min(self.oscillation) >= floor * jump


@dataclass(frozen=True)
class BoxCountReport:
    scales: tuple[float, ...]
    counts: tuple[int, ...]
    dimension: float
    fit_window: tuple[int, int]     # [start, stop) into scales
    r2: float
    part: str

    def as_dict(self) -> dict:
        return {
            "part": self.part,
            "dimension": self.dimension,
            "r2": self.r2,
            "fit_window": list(self.fit_window),
            "scales": list(self.scales),
            "counts": list(self.counts),
        }


def parseval_norm(state: SpectralState) -> float:
    return float(np.sqrt(np.sum(np.abs(state.coeffs) ** 2)))


def _part(values: np.ndarray, part: str) -> np.ndarray:
    if part == "re":
        return values.real
    if part == "im":
        return values.imag
    if part == "abs":
        return np.abs(values)
    raise ValueError(f"unknown part {part!r}")


def total_variation(profile: GridProfile, part: str = "re",
                    theta: ThetaValue | None = None) -> float:
    """Sum of |f(x_{k+1}) - f(x_k)| around the circle.

    The wrap term compares the last sample with exp(2 pi i theta) f(0), so for
    quasi-periodic data pass the twist ``theta``.
    """
    s = profile.samples
    twist = 1.0 if theta is None else np.exp(2j * np.pi * theta.value)
    closed = np.append(s, twist * s[0])
    return float(np.sum(np.abs(np.diff(_part(closed, part)))))


def _distance(profile: GridProfile, x0: float) -> np.ndarray:
    """Periodic distance of every grid point from x0."""
    return np.abs((profile.x - x0 + np.pi) % (2 * np.pi) - np.pi)


def _oscillation(values: np.ndarray, part: str) -> float:
    if values.size == 0:
        return 0.0
    if part == "complex":
        proj = (values[None, :] * _DIRECTIONS[:, None]).real
        return float(np.max(proj.max(axis=1) - proj.min(axis=1)))
    v = _part(values, part)
    return float(v.max() - v.min())


def oscillation_at(profile: GridProfile, x0: float, radii: Sequence[float],
                   part: str = "re", exclude_nearest: int = 0,
                   decay_ratio: float = 0.5) -> OscillationReport:
    """max - min of ``part`` over windows |x - x0| <= r, largest radius first.

    ``part="complex"`` measures the diameter of the complex samples.
    ``exclude_nearest`` drops that many samples closest to x0 (Gibbs zone).
    The verdict is "decays" when the oscillation at the smallest radius is
    below ``decay_ratio`` times the one at the largest.
    """
    h = 2 * np.pi / profile.N
    radii = tuple(sorted((float(r) for r in radii), reverse=True))
    if not radii:
        raise ValueError("at least one radius is needed")
    if radii[-1] < 2 * h * (1 - 1e-12):
        raise ValueError(f"radius {radii[-1]} is below two grid spacings ({2 * h})")
    x0 = float(x0) % (2 * np.pi)
    d = _distance(profile, x0)
    keep = np.ones(profile.N, dtype=bool)
    if exclude_nearest:
        keep[np.argsort(d, kind="stable")[:exclude_nearest]] = False
    osc = tuple(_oscillation(profile.samples[(d <= r) & keep], part) for r in radii)
    verdict = "decays" if osc[-1] < decay_ratio * osc[0] else "jump-persists"
    return OscillationReport(x0, radii, osc, verdict, part)


def boundary_twist_residual(obj, theta: ThetaValue | None = None) -> float:
    """|exp(2 pi i theta) u(0) - u(2 pi^-)|.

    For a :class:`SpectralState` both ends are evaluated from the series; for a
    :class:`GridProfile` the value at 2 pi is extrapolated from the last four
    samples by a cubic.  ``theta`` defaults to the state's basis twist (0 for
    periodic states) and must be given for profiles.
    """
    if isinstance(obj, SpectralState):
        th = obj.theta.value if obj.theta is not None else (theta.value if theta else 0.0)
        lam = obj.modes + th
        start = np.sum(obj.coeffs) / SQRT_2PI
        end = np.sum(obj.coeffs * np.exp(2j * np.pi * lam)) / SQRT_2PI
        return float(abs(np.exp(2j * np.pi * th) * start - end))
    if isinstance(obj, GridProfile):
        th = theta.value if theta is not None else 0.0
        f = obj.samples
        end = -f[-4] + 4 * f[-3] - 6 * f[-2] + 4 * f[-1]
        return float(abs(np.exp(2j * np.pi * th) * f[0] - end))
    raise TypeError(f"expected a SpectralState or GridProfile, got {type(obj).__name__}")


def box_dimension(profile: GridProfile, part: str = "re") -> BoxCountReport:
    """Box-counting dimension of the graph of Re or Im of a sampled profile.

    The graph is normalised to the unit square.  For eps = 2**-k,
    k = 2..floor(log2 N) - 2, every column of width eps (its samples plus the
    first sample of the next column) contributes ceil((max - min)/eps) + 1
    boxes.  The slope of log N(eps) against
    log(1/eps) is fitted by least squares after dropping the two coarsest
    and two finest scales.
    """
    N = profile.N
    if N < 2 ** 10:
        raise ValueError(f"box counting needs at least 1024 samples, got {N}")
    y = np.asarray(_part(profile.samples, part), dtype=float)
    kmax = int(math.floor(math.log2(N))) - 2
    ks = np.arange(2, kmax + 1)
    scales = tuple(2.0 ** -k for k in ks)
    lo, hi = 2, len(ks) - 2
    span = y.max() - y.min()
    if span == 0:
        counts = tuple(int(2 ** k) for k in ks)
        return BoxCountReport(scales, counts, 1.0, (lo, hi), 1.0, part)
    y = (y - y.min()) / span
    counts = []
    for k, eps in zip(ks, scales):
        edges = (np.arange(2 ** k) * N) // (2 ** k)
        top = np.maximum.reduceat(y, edges)
        bottom = np.minimum.reduceat(y, edges)
        # a column also holds the segment joining it to the next column
        top[:-1] = np.maximum(top[:-1], y[edges[1:]])
        bottom[:-1] = np.minimum(bottom[:-1], y[edges[1:]])
        counts.append(int(np.sum(np.ceil((top - bottom) / eps) + 1)))
    lx = ks[lo:hi] * math.log(2.0)
    ly = np.log(np.asarray(counts[lo:hi], dtype=float))
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_tot = np.sum((ly - ly.mean()) ** 2)
    r2 = 1.0 - np.sum(resid ** 2) / ss_tot if ss_tot > 0 else 1.0
    return BoxCountReport(scales, tuple(counts), float(slope), (lo, hi), float(r2), part)


def revival_residual(direct: SpectralState, via_revival: SpectralState) -> float:
    """max_j |c_j(direct) - c_j(revival)|."""
    if direct.coeffs.shape != via_revival.coeffs.shape:
        raise ValueError("states have different truncation orders")
    if direct.basis != via_revival.basis:
        raise ValueError("states are in different bases")
    return float(np.max(np.abs(direct.coeffs - via_revival.coeffs)))


def line_profile(N: int) -> GridProfile:
    """Straight line y = x / (2 pi) in the real part; box dimension 1."""
    x = 2 * np.pi * np.arange(N) / N
    return GridProfile((x / (2 * np.pi)).astype(np.complex128), {"calibration": "line"})


def weierstrass_profile(N: int, H: float = 0.5, terms: int = 15, b: int = 2) -> GridProfile:
    """sum_k b**(-k H) cos(b**k x); graph dimension 2 - H."""
    x = 2 * np.pi * np.arange(N) / N
    y = np.zeros(N)
    for k in range(terms):
        y += b ** (-k * H) * np.cos(b ** k * x)
    return GridProfile(y.astype(np.complex128), {"calibration": "weierstrass", "H": H})
