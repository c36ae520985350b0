"""Outcome vectors and the coefficient ring they generate.

Outcomes of a d-valued measurement are labelled by the vertices v_0..v_{d-1}
of a regular simplex in d-1 dimensions.  Labels compose by index addition
mod d, so linear combinations of labels form the group ring R[Z_d] modulo
the relation sum_k v_k = 0.  A :class:`Coefficient` stores such a
combination as d exact rationals in the mean-zero gauge, which makes
equality decidable.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "Coefficient",
    "OutcomeVector",
    "coeff_convolve",
    "coeff_shift",
    "compose",
    "first_component",
    "format_rational",
    "is_prime",
    "outcome_vector",
    "parse_coefficient",
    "parse_rational",
]


def is_prime(d: int) -> bool:
    if d < 2:
        return False
    return all(d % p for p in range(2, math.isqrt(d) + 1))


def parse_rational(text) -> Fraction:
    """Parse ``"p/q"``, ``"p"`` or an int into a Fraction.

    Floats are rejected: every rational in a payload must be exact.
    """
    if isinstance(text, Fraction):
        return text
    if isinstance(text, bool) or isinstance(text, float):
        raise TypeError(f"expected an exact rational, got {text!r}")
    if isinstance(text, int):
        return Fraction(text)
    if not isinstance(text, str) or not re.fullmatch(r"\s*[-+]?\d+(\s*/\s*\d+)?\s*", text):
        raise ValueError(f"not a rational literal: {text!r}")
    try:
        return Fraction(text.replace(" ", ""))
    except ZeroDivisionError:
        raise ValueError(f"zero denominator in {text!r}") from None


def format_rational(x: Fraction) -> str:
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class OutcomeVector:
    """Geometric outcome label; used to cross-check the index algebra."""

    d: int
    components: tuple[float, ...]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.components, dtype=dtype)

    def dot(self, other: "OutcomeVector") -> float:
        return float(np.dot(self.components, other.components))


def outcome_vector(k: int, d: int) -> OutcomeVector:
    """k-th vertex of the regular simplex with N = d-1 components.

    With D_j = sqrt((N+1)(N-j) / (N(N-j+1))), component j of v_k is 0 for
    k < j, D_j for k == j and -D_j/(N-j) for k > j.  This gives
    v_0 = (1, 0, ...), v_1 = (-1/N, sqrt(N^2-1)/N, 0, ...) and so on.
    """
    if d < 2:
        raise ValueError(f"d must be >= 2, got {d}")
    if not 0 <= k < d:
        raise ValueError(f"outcome index {k} out of range for d={d}")
    N = d - 1
    comps = []
    for j in range(N):
        diag = math.sqrt((N + 1) * (N - j) / (N * (N - j + 1)))
        if k < j:
            comps.append(0.0)
        elif k == j:
            comps.append(diag)
        else:
            comps.append(-diag / (N - j))
    return OutcomeVector(d, tuple(comps))


def compose(a: int, b: int, d: int) -> int:
    """v_a o v_b = v_{(a+b) mod d}."""
    if not (0 <= a < d and 0 <= b < d):
        raise ValueError(f"indices ({a}, {b}) out of range for d={d}")
    return (a + b) % d


def _gauge(alpha: Sequence[Fraction]) -> tuple[Fraction, ...]:
    mean = sum(alpha, Fraction(0)) / len(alpha)
    return tuple(a - mean for a in alpha)


@dataclass(frozen=True)
class Coefficient:
    """sum_k alpha[k] v_k, stored mean-zero.

    Construct through :meth:`from_alpha` (any gauge) or :meth:`basis`;
    the raw constructor assumes the alpha tuple is already canonical.
    """

    d: int
    alpha: tuple[Fraction, ...]

    @classmethod
    def from_alpha(cls, alpha: Iterable) -> "Coefficient":
        values = [parse_rational(a) for a in alpha]
        if len(values) < 2:
            raise ValueError("a coefficient needs at least two alpha entries")
        return cls(len(values), _gauge(values))

    @classmethod
    def zero(cls, d: int) -> "Coefficient":
        return cls(d, (Fraction(0),) * d)

    @classmethod
    def basis(cls, k: int, d: int, scale=1) -> "Coefficient":
        alpha = [Fraction(0)] * d
        alpha[k % d] = Fraction(scale)
        return cls.from_alpha(alpha)

    def __add__(self, other: "Coefficient") -> "Coefficient":
        _check_dims(self, other)
        return Coefficient(self.d, tuple(a + b for a, b in zip(self.alpha, other.alpha)))

    def __sub__(self, other: "Coefficient") -> "Coefficient":
        _check_dims(self, other)
        return Coefficient(self.d, tuple(a - b for a, b in zip(self.alpha, other.alpha)))

    def __neg__(self) -> "Coefficient":
        return Coefficient(self.d, tuple(-a for a in self.alpha))

    def scale(self, c) -> "Coefficient":
        c = Fraction(c)
        return Coefficient(self.d, tuple(c * a for a in self.alpha))

    def __mul__(self, other):
        if isinstance(other, Coefficient):
            return coeff_convolve(self, other)
        return self.scale(other)

    __rmul__ = scale

    def is_zero(self) -> bool:
        return not any(self.alpha)

    def to_vector(self) -> np.ndarray:
        """Float geometric vector sum_k alpha_k v_k."""
        basis = np.array([outcome_vector(k, self.d).components for k in range(self.d)])
        return np.array([float(a) for a in self.alpha]) @ basis

    def to_json(self) -> list[str]:
        return [format_rational(a) for a in self.alpha]

    def __str__(self) -> str:
        return format_coefficient(self)


def _check_dims(x: Coefficient, y: Coefficient) -> None:
    if x.d != y.d:
        raise ValueError(f"dimension mismatch: {x.d} vs {y.d}")


def coeff_convolve(x: Coefficient, y: Coefficient) -> Coefficient:
    """Ring product: z_m = sum_{k+j = m mod d} x_k y_j."""
    _check_dims(x, y)
    d = x.d
    z = [Fraction(0)] * d
    for k, xk in enumerate(x.alpha):
        if not xk:
            continue
        for j, yj in enumerate(y.alpha):
            if yj:
                z[(k + j) % d] += xk * yj
    return Coefficient(d, _gauge(z))


def coeff_shift(x: Coefficient, c: int) -> Coefficient:
    """x o v_c, i.e. alpha rotated by c places."""
    d = x.d
    c %= d
    if c == 0:
        return x
    return Coefficient(d, tuple(x.alpha[(m - c) % d] for m in range(d)))


def first_component(x: Coefficient) -> Fraction:
    """First geometric component of x; equals d*alpha_0/(d-1) in the mean-zero gauge."""
    d = x.d
    return sum(
        (a * (1 if k == 0 else Fraction(-1, d - 1)) for k, a in enumerate(x.alpha)),
        Fraction(0),
    )


_TERM = re.compile(r"([-+]?)\s*(\d+(?:/\d+)?)?\s*\*?\s*v_?\{?(\d+)\}?")


def parse_coefficient(text: str, d: int) -> Coefficient:
    """Parse compact notation like ``"(-4v1+v2)/9"``, ``"2v0/3"`` or ``"0"``.

    An optional overall divisor ``/q`` may follow a parenthesised sum or a
    single term.
    """
    s = text.replace(" ", "")
    if s in ("0", "+0", "-0"):
        return Coefficient.zero(d)
    divisor = Fraction(1)
    m = re.fullmatch(r"([-+]?)\((.*)\)/(\d+)", s)
    if m:
        sign, s, q = m.groups()
        divisor = Fraction(int(q)) * (-1 if sign == "-" else 1)
    else:
        m = re.fullmatch(r"(.*v_?\{?\d+\}?)/(\d+)", s)
        if m and "(" not in s:
            s, q = m.groups()
            divisor = Fraction(int(q))
    alpha = [Fraction(0)] * d
    pos = 0
    for tm in _TERM.finditer(s):
        if tm.start() != pos:
            raise ValueError(f"cannot parse coefficient {text!r}")
        sign, mag, k = tm.groups()
        value = Fraction(mag) if mag else Fraction(1)
        if sign == "-":
            value = -value
        k = int(k)
        if k >= d:
            raise ValueError(f"v{k} out of range for d={d} in {text!r}")
        alpha[k] += value
        pos = tm.end()
    if pos != len(s) or pos == 0:
        raise ValueError(f"cannot parse coefficient {text!r}")
    return Coefficient.from_alpha([a / divisor for a in alpha])


def format_coefficient(x: Coefficient) -> str:
    """Render x using v_1..v_{d-1} only (v_0 eliminated through sum v = 0)."""
    shifted = [a - x.alpha[0] for a in x.alpha]
    den = math.lcm(*(a.denominator for a in shifted))
    parts = []
    for k in range(1, x.d):
        c = shifted[k] * den
        if not c:
            continue
        c = int(c)
        mag = "" if abs(c) == 1 else str(abs(c))
        parts.append(("-" if c < 0 else "+") + f"{mag}v{k}")
    if not parts:
        return "0"
    body = "".join(parts).lstrip("+")
    return body if den == 1 else f"({body})/{den}"
