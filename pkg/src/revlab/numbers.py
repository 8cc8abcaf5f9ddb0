"""Exact arithmetic substrate: theta values, dispersion polynomials, phases.

Every phase in the package is computed as ``exp(-2*pi*i*turns)`` where
``turns`` is reduced modulo one *before* it is turned into a float.  The
reduction is exact whenever the quantity lives in Q(sqrt(k)) with a rational
time, and uses 256-bit fixed point otherwise, so ``P(j + theta) * t`` stays
accurate even when it is of order 1e15 radians.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence, Union

import mpmath
import numpy as np

Rational = Fraction

_FIX_BITS = 256


def _square_split(k: int) -> tuple[int, int]:
    """Return (s, r) with k = s**2 * r and r square-free."""
    s, r = 1, k
    d = 2
    while d * d <= r:
        while r % (d * d) == 0:
            r //= d * d
            s *= d
        d += 1
    return s, r


@dataclass(frozen=True)
class Surd:
    """Exact number ``a + b*sqrt(k)`` with rational a, b and square-free k."""

    a: Fraction = Fraction(0)
    b: Fraction = Fraction(0)
    k: int = 1

    def __post_init__(self):
        a, b, k = Fraction(self.a), Fraction(self.b), int(self.k)
        if k < 1:
            raise ValueError(f"radicand must be positive, got {k}")
        s, k = _square_split(k)
        b *= s
        if k == 1:
            a, b = a + b, Fraction(0)
        if b == 0:
            k = 1
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "k", k)

    @staticmethod
    def of(x: Union["Surd", int, Fraction]) -> "Surd":
        if isinstance(x, Surd):
            return x
        if isinstance(x, (int, Fraction)):
            return Surd(Fraction(x))
        raise TypeError(f"cannot convert {type(x).__name__} to Surd exactly")

    def _common_k(self, other: "Surd") -> int:
        if self.b == 0:
            return other.k
        if other.b == 0 or other.k == self.k:
            return self.k
        raise ValueError(f"incompatible radicands sqrt({self.k}) and sqrt({other.k})")

    def __add__(self, other):
        other = Surd.of(other)
        return Surd(self.a + other.a, self.b + other.b, self._common_k(other))

    __radd__ = __add__

    def __neg__(self):
        return Surd(-self.a, -self.b, self.k)

    def __sub__(self, other):
        return self + (-Surd.of(other))

    def __rsub__(self, other):
        return Surd.of(other) - self

    def __mul__(self, other):
        other = Surd.of(other)
        k = self._common_k(other)
        return Surd(self.a * other.a + self.b * other.b * k,
                    self.a * other.b + self.b * other.a, k)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if not isinstance(e, int) or e < 0:
            raise ValueError("only non-negative integer powers are exact")
        out = Surd(1)
        for _ in range(e):
            out = out * self
        return out

    def __float__(self):
        return float(self.a) + float(self.b) * math.sqrt(self.k)

    @property
    def is_rational(self) -> bool:
        return self.b == 0

    def __str__(self):
        if self.b == 0:
            return str(self.a)
        return f"{self.a} + {self.b}*sqrt({self.k})"


ZERO = Surd(0)
ONE = Surd(1)


def horner(coeffs: Sequence, x):
    """Evaluate sum(coeffs[m] * x**m) for any ring-like x."""
    acc = coeffs[-1]
    for c in reversed(coeffs[:-1]):
        acc = acc * x + c
    return acc


# ---------------------------------------------------------------- theta

_RATIONAL_RE = re.compile(r"^\s*(\d+)\s*/\s*(\d+)\s*$")
_SQRT_RE = re.compile(r"^\s*sqrt\(\s*(\d+)\s*\)\s*(?:/\s*(\d+))?\s*$")
_DECIMAL_RE = re.compile(r"^\s*(\d+\.\d*|\.\d+|\d+)([eE][-+]?\d+)?\s*$")


@dataclass(frozen=True)
class ThetaValue:
    """Boundary twist parameter theta in (0, 1).

    ``kind`` is ``"rational"``, ``"sqrt"`` (sqrt(k)/m with k not a perfect
    square) or ``"decimal"``.  Decimal literals are used at their exact
    decimal value for phases but are never treated as rational when deciding
    whether a revival (finite translate) representation is available.
    """

    kind: str
    exact: Surd
    text: str

    @property
    def value(self) -> float:
        return float(self.exact)

    @property
    def is_rational(self) -> bool:
        return self.kind == "rational"

    @property
    def fraction(self) -> Fraction | None:
        return self.exact.a if self.is_rational else None

    def __str__(self):
        return self.text

    @classmethod
    def _checked(cls, kind, exact, text):
        theta = cls(kind, exact, text)
        if not 0.0 < theta.value < 1.0:
            raise ValueError(f"theta must lie in (0, 1), got {text} = {theta.value!r}")
        return theta

    @classmethod
    def rational(cls, p: int, q: int) -> "ThetaValue":
        r = Fraction(p, q)
        return cls._checked("rational", Surd(r), f"{r.numerator}/{r.denominator}")

    @classmethod
    def sqrt_form(cls, k: int, m: int = 1) -> "ThetaValue":
        if k < 1 or m < 1:
            raise ValueError("sqrt(k)/m needs positive k and m")
        exact = Surd(0, Fraction(1, m), k)
        if exact.is_rational:
            r = exact.a
            return cls._checked("rational", exact, f"{r.numerator}/{r.denominator}")
        return cls._checked("sqrt", exact, f"sqrt({k})/{m}" if m != 1 else f"sqrt({k})")

    @classmethod
    def decimal(cls, x: Union[str, float]) -> "ThetaValue":
        text = x if isinstance(x, str) else repr(float(x))
        return cls._checked("decimal", Surd(Fraction(text.strip())), text.strip())

    @classmethod
    def unchecked(cls, x: Union[Surd, int, Fraction]) -> "ThetaValue":
        """Theta outside (0, 1), e.g. theta = 0, for use as a test oracle."""
        exact = Surd.of(x)
        kind = "rational" if exact.is_rational else "sqrt"
        return cls(kind, exact, str(exact))


def parse_theta(text: str) -> ThetaValue:
    """Parse ``p/q``, ``sqrt(k)/m`` or a decimal literal."""
    if isinstance(text, ThetaValue):
        return text
    m = _RATIONAL_RE.match(text)
    if m:
        q = int(m.group(2))
        if q == 0:
            raise ValueError(f"zero denominator in theta {text!r}")
        return ThetaValue.rational(int(m.group(1)), q)
    m = _SQRT_RE.match(text)
    if m:
        return ThetaValue.sqrt_form(int(m.group(1)), int(m.group(2) or 1))
    if _DECIMAL_RE.match(text):
        return ThetaValue.decimal(text)
    raise ValueError(f"malformed theta {text!r}; expected p/q, sqrt(k)/m or a decimal")


# ----------------------------------------------------------------- time

@dataclass(frozen=True)
class RationalTime:
    """Rational time ``2*pi*p/q``; the fraction is reduced on construction."""

    p: int
    q: int

    def __post_init__(self):
        if self.p < 1 or self.q < 1:
            raise ValueError(f"rational time needs positive p, q, got {self.p}/{self.q}")
        g = math.gcd(self.p, self.q)
        object.__setattr__(self, "p", self.p // g)
        object.__setattr__(self, "q", self.q // g)

    @property
    def seconds(self) -> float:
        return 2.0 * math.pi * self.p / self.q

    @property
    def turns(self) -> "Turns":
        return Turns(Surd(Fraction(self.p, self.q)))

    def __str__(self):
        return f"{self.p}/{self.q}"


@dataclass(frozen=True)
class Turns:
    """A real quantity in units of 2*pi (a time or a translation length).

    The value is ``coef`` turns when ``raw`` is None, and
    ``coef * raw / (2*pi)`` turns otherwise (``raw`` being a length or time
    given in plain float units).
    """

    coef: Surd
    raw: float | None = None

    @classmethod
    def of_fraction(cls, r: Union[Fraction, int]) -> "Turns":
        return cls(Surd(Fraction(r)))

    @classmethod
    def of_seconds(cls, t: float) -> "Turns":
        return cls(ONE, float(t))

    @classmethod
    def coerce(cls, t) -> "Turns":
        if isinstance(t, Turns):
            return t
        if isinstance(t, RationalTime):
            return t.turns
        if isinstance(t, (int, float, np.floating, np.integer)):
            return cls.of_seconds(float(t))
        raise TypeError(f"cannot interpret {t!r} as a time")

    def scaled(self, s) -> "Turns":
        return Turns(self.coef * Surd.of(s), self.raw)

    @property
    def seconds(self) -> float:
        if self.raw is None:
            return 2.0 * math.pi * float(self.coef)
        return float(self.coef) * self.raw

    @property
    def fraction(self) -> Fraction | None:
        """Exact value in turns when it is rational and exactly known."""
        if self.raw is None and self.coef.is_rational:
            return self.coef.a
        return None

    def __str__(self):
        if self.raw is None:
            return f"2pi*({self.coef})"
        return f"({self.coef})*{self.raw!r}"


def as_turns(t) -> Turns:
    return Turns.coerce(t)


def _fixed_point(x: mpmath.mpf) -> int:
    return int(mpmath.nint(x * mpmath.mpf(2) ** _FIX_BITS))


def poly_turns(coeffs: Sequence[Surd], j, t) -> np.ndarray:
    """Fractional part of ``sum_e coeffs[e] * j**e * t`` in turns.

    ``j`` is an integer array, ``t`` anything accepted by :func:`as_turns`.
    Returns float64 values in [0, 1).
    """
    t = as_turns(t)
    scaled = [Surd.of(c) * t.coef for c in coeffs]
    radicands = {c.k for c in scaled if c.b != 0}
    if len(radicands) > 1:
        raise ValueError("mixed radicands in one phase polynomial")
    k = radicands.pop() if radicands else 1
    den = 1
    for c in scaled:
        den = math.lcm(den, c.a.denominator, c.b.denominator)
    ai = [int(c.a * den) for c in scaled]
    bi = [int(c.b * den) for c in scaled]
    jo = np.asarray(j, dtype=np.int64).astype(object)

    def ipoly(cs):
        acc = np.full(jo.shape, cs[-1], dtype=object)
        for c in reversed(cs[:-1]):
            acc = acc * jo + c
        return acc

    a_val = ipoly(ai)
    has_b = any(bi)
    if t.raw is None and not has_b:
        num, mod = a_val, den
    elif t.raw is None:
        one = 1 << _FIX_BITS
        root = math.isqrt(k << (2 * _FIX_BITS))
        num, mod = a_val * one + ipoly(bi) * root, den << _FIX_BITS
    else:
        with mpmath.workprec(_FIX_BITS + 96):
            x = mpmath.mpf(t.raw) / (2 * mpmath.pi)
            xf = _fixed_point(x)
            xs = _fixed_point(x * mpmath.sqrt(k))
        num = a_val * xf
        if has_b:
            num = num + ipoly(bi) * xs
        mod = den << _FIX_BITS
    rem = num % mod
    top = (rem * (1 << 53)) // mod
    return np.asarray(top, dtype=np.float64) / float(1 << 53)


def phase_factors(coeffs: Sequence[Surd], j, t) -> np.ndarray:
    """``exp(-i * poly(j) * t)`` with exact argument reduction."""
    return np.exp(-2j * np.pi * poly_turns(coeffs, j, t))


# ----------------------------------------------------------- polynomials

@dataclass(frozen=True)
class DispersionPolynomial:
    """P(lambda) = sum alpha[m] lambda**m with integer coefficients."""

    alpha: tuple[int, ...]

    def __post_init__(self):
        alpha = tuple(self.alpha)
        for a in alpha:
            if isinstance(a, bool) or not isinstance(a, (int, np.integer)):
                raise TypeError(f"dispersion coefficients must be integers, got {a!r}")
        alpha = tuple(int(a) for a in alpha)
        if len(alpha) < 3:
            raise ValueError("dispersion polynomial must have order >= 2")
        if alpha[-1] == 0:
            raise ValueError("leading coefficient alpha_n must be non-zero")
        object.__setattr__(self, "alpha", alpha)

    @classmethod
    def monomial(cls, n: int, coefficient: int = 1) -> "DispersionPolynomial":
        return cls((0,) * n + (coefficient,))

    @classmethod
    def parse(cls, text: str) -> "DispersionPolynomial":
        return cls(tuple(int(s) for s in text.split(",")))

    @property
    def order(self) -> int:
        return len(self.alpha) - 1

    def derivative_coefficients(self) -> tuple[int, ...]:
        return tuple(m * a for m, a in enumerate(self.alpha))[1:]

    def __str__(self):
        return ",".join(str(a) for a in self.alpha)


def eval_P(P: DispersionPolynomial, x):
    """Horner evaluation of P; exact for int, Fraction and Surd arguments."""
    if isinstance(x, (Fraction, Surd, int)):
        return horner(list(P.alpha), x)
    return float(horner([float(a) for a in P.alpha], float(x)))


def _theta_exact(theta) -> Surd:
    if isinstance(theta, ThetaValue):
        return theta.exact
    if isinstance(theta, str):
        return parse_theta(theta).exact
    return Surd.of(theta)


def drift_exact(P: DispersionPolynomial, theta) -> Surd:
    return horner([Surd.of(c) for c in P.derivative_coefficients()], _theta_exact(theta))


def drift(P: DispersionPolynomial, theta) -> float:
    """s_theta = P'(theta)."""
    return float(drift_exact(P, theta))


@dataclass(frozen=True)
class TransformedPolynomial:
    """A(lambda) = sum_{k=2}^n a_k lambda**k, the periodic-side dispersion."""

    exact: tuple[Surd, ...]          # a_2 .. a_n
    theta: ThetaValue
    source: DispersionPolynomial
    a: tuple[float, ...] = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(float(c) for c in self.exact))

    @property
    def coefficients(self) -> list[Surd]:
        """All coefficients from degree 0 (two zeros) up to n."""
        return [ZERO, ZERO, *self.exact]

    def __call__(self, lam):
        if isinstance(lam, (int, Fraction, Surd)):
            return horner(self.coefficients, Surd.of(lam))
        return float(horner([0.0, 0.0, *self.a], float(lam)))


def transform_polynomial(P: DispersionPolynomial, theta) -> TransformedPolynomial:
    if P.order < 2:
        raise ValueError("transform needs order >= 2")
    if not isinstance(theta, ThetaValue):
        theta = parse_theta(theta) if isinstance(theta, str) else ThetaValue.unchecked(theta)
    th = theta.exact
    n = P.order
    coeffs = []
    for k in range(2, n + 1):
        acc = ZERO
        for m in range(k, n + 1):
            acc = acc + P.alpha[m] * math.comb(m, k) * th ** (m - k)
        coeffs.append(acc)
    return TransformedPolynomial(tuple(coeffs), theta, P)


def shifted_coefficients(P: DispersionPolynomial, theta) -> list[Surd]:
    """Coefficients c_e with P(j + theta) = sum c_e j**e (Taylor shift)."""
    th = _theta_exact(theta)
    b = [Surd.of(a) for a in P.alpha]
    n = len(b) - 1
    for i in range(n):
        for k in range(n - 1, i - 1, -1):
            b[k] = b[k] + th * b[k + 1]
    return b


def quasi_eigenvalue_exact(P: DispersionPolynomial, theta, j: int) -> Surd:
    return horner([Surd.of(a) for a in P.alpha], Surd.of(j) + _theta_exact(theta))


def quasi_eigenvalue(P: DispersionPolynomial, theta, j: int) -> float:
    """P(j + theta)."""
    return float(quasi_eigenvalue_exact(P, theta, j))


# ----------------------------------------------------- composition plans

@dataclass(frozen=True)
class PlanFactor:
    """One factor R_order(tau) of a composition plan."""

    order: int
    time: Turns
    time_is_rational: bool

    @property
    def tau(self) -> float:
        return self.time.seconds

    @property
    def rational_form(self) -> Fraction | None:
        """tau / (2*pi) as an exact signed fraction, when rational."""
        return self.time.fraction if self.time_is_rational else None


@dataclass(frozen=True)
class CompositionPlan:
    polynomial: DispersionPolynomial
    theta: ThetaValue
    time: Turns
    factors: tuple[PlanFactor, ...]

    def __len__(self):
        return len(self.factors)

    def __iter__(self):
        return iter(self.factors)


def composition_plan(P: DispersionPolynomial, theta: ThetaValue, t) -> CompositionPlan:
    """Factorise exp(-i A(j) t) into monomial group factors.

    Factors R_l(alpha_l t) for l = 2..n come first, followed by
    R_k(alpha_{m+1} C(m+1, k) theta**(m+1-k) t) for m = 2..n-1, k = 2..m.
    Factors with a zero time coefficient are omitted.
    """
    if P.order < 3:
        raise ValueError("composition plans need order >= 3; use the second-order path")
    if not isinstance(theta, ThetaValue):
        theta = parse_theta(theta)
    t = as_turns(t)
    t_rational = t.fraction is not None
    th = theta.exact
    factors = []
    for ell in range(2, P.order + 1):
        if P.alpha[ell]:
            factors.append(PlanFactor(ell, t.scaled(P.alpha[ell]), t_rational))
    cross_rational = t_rational and theta.is_rational
    for m in range(2, P.order):
        for k in range(2, m + 1):
            a = P.alpha[m + 1]
            if not a:
                continue
            c = a * math.comb(m + 1, k) * th ** (m + 1 - k)
            factors.append(PlanFactor(k, t.scaled(c), cross_rational))
    return CompositionPlan(P, theta, t, tuple(factors))


def parse_time(text: str, raw: bool = False):
    """Parse a time flag: ``p/q`` or a decimal, in units of 2*pi unless raw."""
    text = text.strip()
    m = _RATIONAL_RE.match(text)
    if m and not raw:
        p, q = int(m.group(1)), int(m.group(2))
        if p == 0:
            return Turns.of_fraction(0)
        return RationalTime(p, q)
    if m and raw:
        return Turns.of_seconds(int(m.group(1)) / int(m.group(2)))
    if _DECIMAL_RE.match(text):
        value = Fraction(text)
        if raw:
            return Turns.of_seconds(float(value))
        return Turns.of_fraction(value)
    raise ValueError(f"malformed time {text!r}")


def reduced_turns(r: Fraction) -> tuple[int, int]:
    """(p, q) with p/q = r mod 1, coprime, p, q >= 1 (zero maps to 1/1)."""
    r = r - math.floor(r)
    if r == 0:
        return 1, 1
    return r.numerator, r.denominator


def lcm_all(values: Iterable[int]) -> int:
    out = 1
    for v in values:
        out = math.lcm(out, v)
    return out
