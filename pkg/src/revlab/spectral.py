"""Coefficient-space states and the linear operators acting on them.

A :class:`SpectralState` holds coefficients ``c_j`` for ``j = -J..J``.  In the
periodic basis it represents ``z = sum c_j e_j`` with
``e_j(x) = exp(i j x)/sqrt(2 pi)``; in the quasi-periodic basis it represents
``u = sum c_j phi_j`` with ``phi_j(x) = exp(i (j + theta) x)/sqrt(2 pi)``.
Re-tagging the basis without touching the coefficients is exactly the map
``z = exp(-i theta x) u``.

All evolution operators are diagonal and unitary; phases are produced by
:func:`revlab.numbers.phase_factors` so large ``j**n t`` stay accurate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .numbers import (
    ONE,
    ZERO,
    CompositionPlan,
    DispersionPolynomial,
    Surd,
    ThetaValue,
    TransformedPolynomial,
    as_turns,
    composition_plan,
    drift_exact,
    eval_P,
    lcm_all,
    phase_factors,
    reduced_turns,
    shifted_coefficients,
    transform_polynomial,
)

SQRT_2PI = math.sqrt(2.0 * math.pi)

# jumps of the initial box (1 on (pi/2, 3pi/2)) as (location in turns, size)
BOX_JUMPS = ((Fraction(1, 4), 1.0), (Fraction(3, 4), -1.0))


class BasisError(ValueError):
    """An operation was applied to a state in the wrong basis."""


@dataclass(frozen=True, eq=False)
class SpectralState:
    coeffs: np.ndarray
    theta: ThetaValue | None = None     # None -> periodic basis

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=np.complex128)
        if c.ndim != 1 or c.size % 2 != 1:
            raise ValueError("coefficient vector must have odd length 2J+1")
        c = c.copy()
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def J(self) -> int:
        return (self.coeffs.size - 1) // 2

    @property
    def modes(self) -> np.ndarray:
        return np.arange(-self.J, self.J + 1)

    @property
    def basis(self) -> str:
        return "periodic" if self.theta is None else "quasi"

    @property
    def is_periodic(self) -> bool:
        return self.theta is None

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def with_coeffs(self, coeffs) -> "SpectralState":
        return SpectralState(coeffs, self.theta)

    def as_periodic(self) -> "SpectralState":
        return SpectralState(self.coeffs, None)

    def as_quasi(self, theta: ThetaValue) -> "SpectralState":
        return SpectralState(self.coeffs, theta)

    def coefficient(self, j: int) -> complex:
        return complex(self.coeffs[j + self.J])

    @classmethod
    def zeros(cls, J: int, theta: ThetaValue | None = None) -> "SpectralState":
        return cls(np.zeros(2 * J + 1, dtype=np.complex128), theta)

    @classmethod
    def unit(cls, J: int, j: int, theta: ThetaValue | None = None, amplitude=1.0):
        c = np.zeros(2 * J + 1, dtype=np.complex128)
        c[j + J] = amplitude
        return cls(c, theta)


@dataclass(frozen=True, eq=False)
class GridProfile:
    """Samples at x_k = 2 pi k / N, k = 0..N-1."""

    samples: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=np.complex128)
        if s.ndim != 1 or s.size < 2:
            raise ValueError("profile needs at least two samples")
        object.__setattr__(self, "samples", s)

    @property
    def N(self) -> int:
        return self.samples.size

    @property
    def x(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.N) / self.N

    def part(self, name: str) -> np.ndarray:
        if name == "re":
            return self.samples.real
        if name == "im":
            return self.samples.imag
        if name == "abs":
            return np.abs(self.samples)
        raise ValueError(f"unknown part {name!r}")


def _require_periodic(state: SpectralState, what: str):
    if not state.is_periodic:
        raise BasisError(f"{what} acts on periodic-basis states only")


def _require_quasi(state: SpectralState, what: str):
    if state.is_periodic:
        raise BasisError(f"{what} needs a quasi-periodic-basis state")


# ----------------------------------------------------- grid <-> spectrum

def analyze(profile: GridProfile, J: int, theta: ThetaValue | None = None) -> SpectralState:
    """DFT quadrature of <f, basis_j> for j = -J..J."""
    N = profile.N
    if N < 2 * J + 1:
        raise ValueError(f"grid of {N} points cannot resolve J = {J}")
    f = profile.samples
    if theta is not None:
        f = f * np.exp(-1j * theta.value * profile.x)
    spec = np.fft.fft(f) * (SQRT_2PI / N)
    j = np.arange(-J, J + 1)
    return SpectralState(spec[j % N], theta)


def synthesize(state: SpectralState, N: int, meta: dict | None = None) -> GridProfile:
    """Evaluate the truncated series at N uniform points (zero-padded inverse DFT)."""
    J = state.J
    if N < 2 * J + 1:
        raise ValueError(f"grid of {N} points cannot represent J = {J}")
    buf = np.zeros(N, dtype=np.complex128)
    buf[state.modes % N] = state.coeffs
    samples = np.fft.ifft(buf) * (N / SQRT_2PI)
    if state.theta is not None:
        samples = samples * np.exp(1j * state.theta.value * 2.0 * np.pi * np.arange(N) / N)
    info = {"J": J, "basis": state.basis}
    if state.theta is not None:
        info["theta"] = state.theta.text
    info.update(meta or {})
    return GridProfile(samples, info)


def box_coefficients_closed_form(theta: ThetaValue, J: int) -> SpectralState:
    """Quasi-basis coefficients of the indicator of (pi/2, 3pi/2)."""
    j = np.arange(-J, J + 1)
    th = theta.value
    # exp(-3 pi i j / 2) = i**j and exp(-pi i j / 2) = (-i)**j, exactly
    ipow = np.array([1, 1j, -1, -1j])[j % 4]
    c = 1j / SQRT_2PI * (ipow * np.exp(-1.5j * np.pi * th)
                         - np.conj(ipow) * np.exp(-0.5j * np.pi * th)) / (j + th)
    return SpectralState(c, theta)


def box_coefficients_periodic(J: int) -> SpectralState:
    """Periodic-basis coefficients of the same indicator (theta = 0)."""
    j = np.arange(-J, J + 1)
    c = np.empty(j.size, dtype=np.complex128)
    nz = j != 0
    c[nz] = 1j / SQRT_2PI * (np.exp(-1.5j * np.pi * j[nz]) - np.exp(-0.5j * np.pi * j[nz])) / j[nz]
    c[~nz] = np.pi / SQRT_2PI
    return SpectralState(c)


def box_profile(N: int) -> GridProfile:
    """Exact samples of the indicator of the open interval (pi/2, 3pi/2)."""
    k = np.arange(N)
    # compare 4k against N and 3N to avoid rounding at the endpoints
    inside = (4 * k > N) & (4 * k < 3 * N)
    return GridProfile(inside.astype(np.complex128), {"initial": "box"})


# ------------------------------------------------------------ evolutions

def evolve_quasi(state: SpectralState, P: DispersionPolynomial, t) -> SpectralState:
    """c_j <- c_j exp(-i P(j + theta) t)."""
    _require_quasi(state, "evolve_quasi")
    coeffs = shifted_coefficients(P, state.theta)
    return state.with_coeffs(state.coeffs * phase_factors(coeffs, state.modes, t))


def evolve_periodic(state: SpectralState, A: TransformedPolynomial, t) -> SpectralState:
    """c_j <- c_j exp(-i A(j) t)."""
    _require_periodic(state, "evolve_periodic")
    return state.with_coeffs(state.coeffs * phase_factors(A.coefficients, state.modes, t))


def translate(state: SpectralState, s) -> SpectralState:
    """Periodic translation T_s: c_j <- c_j exp(-i j s).

    ``s`` is a float length or a :class:`Turns`.
    """
    _require_periodic(state, "translate")
    return state.with_coeffs(state.coeffs * phase_factors([ZERO, ONE], state.modes, s))


def apply_group(state: SpectralState, n: int, t) -> SpectralState:
    """R_n(t): c_j <- c_j exp(-i j**n t)."""
    if n < 1:
        raise ValueError(f"group order must be >= 1, got {n}")
    _require_periodic(state, "apply_group")
    coeffs = [ZERO] * n + [ONE]
    return state.with_coeffs(state.coeffs * phase_factors(coeffs, state.modes, t))


# -------------------------------------------------- revivals / translates

@dataclass(frozen=True, eq=False)
class TranslationCombination:
    """The operator sum_k w[k] T_{2 pi k / q}."""

    q: int
    w: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.w, dtype=np.complex128)
        if w.shape != (self.q,):
            raise ValueError("weight vector length must equal q")
        object.__setattr__(self, "w", w)

    def support(self, tol: float = 1e-12) -> np.ndarray:
        return np.flatnonzero(np.abs(self.w) > tol)

    def multipliers(self, j: np.ndarray) -> np.ndarray:
        """sum_k w_k exp(-2 pi i j k / q) for each mode j."""
        r = np.arange(self.q)
        if self.q <= 2048:
            phase = np.outer(r, r) % self.q
            table = np.exp(-2j * np.pi * phase / self.q) @ self.w
        else:
            table = np.fft.fft(self.w)
        return table[np.asarray(j) % self.q]


@dataclass(frozen=True, eq=False)
class RevivalWeights(TranslationCombination):
    """Weights of R_n(2 pi p / q) as a combination of translations."""

    n: int = 2
    p: int = 1


def revival_weights(n: int, p: int, q: int) -> RevivalWeights:
    """w_k = (1/q) sum_m exp(2 pi i (-m**n p + m k) / q)."""
    if n < 2:
        raise ValueError("revival weights need order n >= 2")
    if p < 1 or q < 1:
        raise ValueError("p and q must be positive")
    if math.gcd(p, q) != 1:
        raise ValueError(f"p = {p} and q = {q} are not coprime")
    m = np.arange(q)
    residues = np.array([pow(int(mm), n, q) for mm in m], dtype=np.int64)
    if q <= 2048:
        arg = (-(residues * p)[:, None] + np.outer(m, m)) % q
        w = np.exp(2j * np.pi * arg / q).sum(axis=0) / q
    else:
        g = np.exp(-2j * np.pi * ((residues * p) % q) / q)
        w = np.fft.ifft(g)
    return RevivalWeights(q, w, n=n, p=p)


def apply_revival(state: SpectralState, wts: TranslationCombination) -> SpectralState:
    """sum_k w_k T_{2 pi k / q} state."""
    _require_periodic(state, "apply_revival")
    return state.with_coeffs(state.coeffs * wts.multipliers(state.modes))


def translation_delta(shift: Fraction) -> TranslationCombination:
    """T_{2 pi r} for rational r as a one-hot combination."""
    r = shift - math.floor(shift)
    q = r.denominator
    w = np.zeros(q, dtype=np.complex128)
    w[r.numerator] = 1.0
    return TranslationCombination(q, w)


def compose_combinations(combos: Sequence[TranslationCombination]) -> TranslationCombination:
    """Product of translate combinations on the common grid 2 pi / lcm(q)."""
    Q = lcm_all(c.q for c in combos)
    acc = np.zeros(Q, dtype=np.complex128)
    acc[0] = 1.0
    for c in combos:
        emb = np.zeros(Q, dtype=np.complex128)
        emb[np.arange(c.q) * (Q // c.q)] = c.w
        acc = np.fft.ifft(np.fft.fft(acc) * np.fft.fft(emb))
    return TranslationCombination(Q, acc)


def factor_revival(order: int, turns: Fraction) -> RevivalWeights:
    p, q = reduced_turns(turns)
    return revival_weights(order, p, q)


def evolve_by_composition(state: SpectralState, plan: CompositionPlan,
                          mode: str = "diagonal") -> SpectralState:
    """Apply the plan's factors in order.

    ``mode``: ``"diagonal"`` uses the unitary groups directly,
    ``"revival-where-rational"`` swaps in translate combinations for rational
    factor times, ``"revival"`` insists on them and rejects irrational factors.
    """
    if mode not in ("diagonal", "revival-where-rational", "revival"):
        raise ValueError(f"unknown composition mode {mode!r}")
    _require_periodic(state, "evolve_by_composition")
    if not plan.factors:
        raise ValueError("empty composition plan")
    out = state
    for f in plan.factors:
        r = f.rational_form
        if mode != "diagonal" and r is not None:
            out = apply_revival(out, factor_revival(f.order, r))
        elif mode == "revival":
            raise ValueError(f"factor R_{f.order}({f.time}) has irrational time")
        else:
            out = apply_group(out, f.order, f.time)
    return out


# ---------------------------------------------------------- correspondence

def _global_turns(P: DispersionPolynomial, theta: ThetaValue) -> list[Surd]:
    return [Surd.of(eval_P(P, theta.exact))]


def quasi_to_periodic(state: SpectralState, P: DispersionPolynomial, t):
    """Quasi solution u(t) -> periodic solution z(t).

    z_j = u_j exp(i P(theta) t) exp(i j s_theta t).  Returns the periodic
    state and the global phase exp(i P(theta) t) that was applied.
    """
    _require_quasi(state, "quasi_to_periodic")
    theta = state.theta
    t = as_turns(t)
    glob = np.conj(phase_factors(_global_turns(P, theta), np.zeros(1, dtype=np.int64), t)[0])
    shift = np.conj(phase_factors([ZERO, drift_exact(P, theta)], state.modes, t))
    return SpectralState(state.coeffs * shift * glob, None), complex(glob)


def periodic_to_quasi(state: SpectralState, P: DispersionPolynomial,
                      theta: ThetaValue, t) -> SpectralState:
    """u = exp(-i (P(theta) t - theta x)) T_{s_theta t} z, in coefficients."""
    _require_periodic(state, "periodic_to_quasi")
    t = as_turns(t)
    glob = phase_factors(_global_turns(P, theta), np.zeros(1, dtype=np.int64), t)[0]
    shifted = translate(state, t.scaled(drift_exact(P, theta)))
    return SpectralState(shifted.coeffs * glob, theta)


def evolve_correspondence(u0: SpectralState, P: DispersionPolynomial, t) -> SpectralState:
    """Quasi evolution routed through the transformed periodic problem."""
    _require_quasi(u0, "evolve_correspondence")
    A = transform_polynomial(P, u0.theta)
    z = evolve_periodic(u0.as_periodic(), A, t)
    return periodic_to_quasi(z, P, u0.theta, t)


def evolve_composition(u0: SpectralState, P: DispersionPolynomial, t,
                       mode: str = "revival-where-rational") -> SpectralState:
    """Quasi evolution via the composition representation (order >= 3)."""
    _require_quasi(u0, "evolve_composition")
    plan = composition_plan(P, u0.theta, t)
    z = evolve_by_composition(u0.as_periodic(), plan, mode)
    return periodic_to_quasi(z, P, u0.theta, t)


def quasi_revival_combination(P: DispersionPolynomial, theta: ThetaValue, t):
    """Explicit finite-translate form of the quasi evolution at rational theta, t.

    Returns ``(global_phase, combo)`` with
    ``u(x, t) = global_phase * exp(i theta x) * sum_K W_K z0*(x - 2 pi K / Q)``.
    """
    if not theta.is_rational:
        raise ValueError("a finite translate representation needs rational theta")
    t = as_turns(t)
    if t.fraction is None:
        raise ValueError("a finite translate representation needs a rational time")
    if P.order == 2:
        combos = [factor_revival(2, t.fraction * P.alpha[2])]
    else:
        plan = composition_plan(P, theta, t)
        combos = [factor_revival(f.order, f.rational_form) for f in plan.factors]
    drift_turns = t.scaled(drift_exact(P, theta)).fraction
    combos.append(translation_delta(drift_turns))
    combo = compose_combinations(combos)
    glob = phase_factors(_global_turns(P, theta), np.zeros(1, dtype=np.int64), t)[0]
    return complex(glob), combo


def apply_quasi_revival(u0: SpectralState, P: DispersionPolynomial, t) -> SpectralState:
    _require_quasi(u0, "apply_quasi_revival")
    glob, combo = quasi_revival_combination(P, u0.theta, t)
    z = apply_revival(u0.as_periodic(), combo)
    return SpectralState(z.coeffs * glob, u0.theta)


def jump_candidates(combo: TranslationCombination, jumps=BOX_JUMPS, tol: float = 1e-9):
    """Jump locations and complex jump sizes of sum_K W_K T_{2pi K/Q} f.

    ``jumps`` lists (location in turns, size) of the untranslated f.
    Coinciding locations are merged; jumps that cancel are dropped.  Returns
    (location in radians, complex size) pairs.
    """
    merged: dict[Fraction, complex] = {}
    for K in combo.support():
        for x0, size in jumps:
            loc = x0 + Fraction(int(K), combo.q)
            loc -= math.floor(loc)
            merged[loc] = merged.get(loc, 0) + combo.w[K] * size
    out = [(2 * math.pi * float(loc), val) for loc, val in sorted(merged.items()) if abs(val) > tol]
    return out


# ---------------------------------------------------------- second order

def evolve_second_order(state: SpectralState, alpha: Sequence[int], t) -> SpectralState:
    """Quasi evolution with eigenvalues sum_m alpha_m (j + theta)**m, m <= 2."""
    alpha = tuple(alpha)
    if len(alpha) != 3:
        raise ValueError("second-order path needs [alpha0, alpha1, alpha2]")
    if alpha[2] == 0:
        raise ValueError("alpha2 must be non-zero")
    return evolve_quasi(state, DispersionPolynomial(alpha), t)


def second_order_wrapper(state: SpectralState, alpha: Sequence[int], t,
                         use_revival: bool = True) -> SpectralState:
    """Same evolution via exp(-i t P(theta)) T_{s t} R_2(alpha2 t) on the z side.

    With ``use_revival`` and a rational time, R_2 is applied as a finite
    combination of translates, for any theta.
    """
    _require_quasi(state, "second_order_wrapper")
    P = DispersionPolynomial(tuple(alpha))
    if P.order != 2:
        raise ValueError("second-order wrapper needs alpha2 != 0")
    t = as_turns(t)
    z0 = state.as_periodic()
    tau = t.scaled(P.alpha[2])
    if use_revival and tau.fraction is not None:
        z = apply_revival(z0, factor_revival(2, tau.fraction))
    else:
        z = apply_group(z0, 2, tau)
    return periodic_to_quasi(z, P, state.theta, t)
