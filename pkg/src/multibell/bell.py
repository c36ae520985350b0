"""Full-correlated multi-component Bell functions and their probability forms.

A Bell function for n parties with two d-outcome settings each is a map from
setting tuples s in {0,1}^n to ring coefficients omega_s.  Setting tuples are
stored as integers with the first party in the most significant bit, so the
bitstring ``"010"`` (A0 B1 C0) is index 2.  The last party is the one the
iteration formula appends.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .algebra import (
    Coefficient,
    coeff_convolve,
    coeff_shift,
    first_component,
    format_rational,
    is_prime,
    parse_coefficient,
    parse_rational,
)

PARTY_NAMES = "ABCDEFGHIJKLMNOPQRSTUVWXYZ"


def setting_key(index: int, n: int) -> str:
    return format(index, f"0{n}b")


def setting_bits(index: int, n: int) -> tuple[int, ...]:
    return tuple((index >> (n - 1 - p)) & 1 for p in range(n))


def setting_index(bits) -> int:
    if isinstance(bits, str):
        if not re.fullmatch(r"[01]+", bits):
            raise ValueError(f"bad setting key {bits!r}")
        return int(bits, 2)
    out = 0
    for b in bits:
        out = 2 * out + int(b)
    return out


@dataclass(frozen=True)
class BellFunction:
    n: int
    d: int
    coeffs: tuple[Coefficient, ...]

    def __post_init__(self):
        if self.n < 1 or self.d < 2:
            raise ValueError(f"need n >= 1 and d >= 2, got n={self.n}, d={self.d}")
        if len(self.coeffs) != 2**self.n:
            raise ValueError(f"expected {2**self.n} coefficients, got {len(self.coeffs)}")
        for c in self.coeffs:
            if c.d != self.d:
                raise ValueError("coefficient dimension does not match d")

    @classmethod
    def from_mapping(cls, n: int, d: int, coeffs: Mapping) -> "BellFunction":
        """Build from {key: Coefficient | alpha list | compact string}.

        Keys may be bitstrings, bit tuples or integers.  Missing keys are an
        error: a Bell function here is always total.
        """
        table: list[Coefficient | None] = [None] * 2**n
        for key, value in coeffs.items():
            idx = key if isinstance(key, int) else setting_index(key)
            if isinstance(key, str) and len(key) != n:
                raise ValueError(f"key {key!r} does not have {n} bits")
            if not 0 <= idx < 2**n:
                raise ValueError(f"setting {key!r} out of range")
            table[idx] = _as_coefficient(value, d)
        missing = [setting_key(i, n) for i, c in enumerate(table) if c is None]
        if missing:
            raise ValueError(f"missing coefficients for settings {missing}")
        return cls(n, d, tuple(table))  # type: ignore[arg-type]

    @classmethod
    def zero(cls, n: int, d: int) -> "BellFunction":
        return cls(n, d, (Coefficient.zero(d),) * 2**n)

    def __getitem__(self, key) -> Coefficient:
        idx = key if isinstance(key, int) else setting_index(key)
        return self.coeffs[idx]

    def __add__(self, other: "BellFunction") -> "BellFunction":
        _check_shape(self, other)
        return BellFunction(self.n, self.d, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other: "BellFunction") -> "BellFunction":
        _check_shape(self, other)
        return BellFunction(self.n, self.d, tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def __neg__(self) -> "BellFunction":
        return BellFunction(self.n, self.d, tuple(-a for a in self.coeffs))

    def scale(self, c) -> "BellFunction":
        return BellFunction(self.n, self.d, tuple(a.scale(c) for a in self.coeffs))

    def alpha_matrix(self) -> list[list[Fraction]]:
        return [list(c.alpha) for c in self.coeffs]

    def alpha_array(self) -> np.ndarray:
        """Float alpha array of shape (2^n, d)."""
        return np.array([[float(a) for a in c.alpha] for c in self.coeffs])

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "d": self.d,
            "coeffs": {setting_key(i, self.n): c.to_json() for i, c in enumerate(self.coeffs)},
        }

    @classmethod
    def from_json(cls, data) -> "BellFunction":
        if isinstance(data, (str, Path)):
            data = json.loads(Path(data).read_text())
        try:
            n, d, coeffs = int(data["n"]), int(data["d"]), data["coeffs"]
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed Bell function payload: {exc}") from None
        for key, alpha in coeffs.items():
            if isinstance(alpha, list) and len(alpha) != d:
                raise ValueError(f"setting {key} has {len(alpha)} entries, expected {d}")
        return cls.from_mapping(n, d, coeffs)

    def pretty(self) -> str:
        terms = []
        for i, c in enumerate(self.coeffs):
            if c.is_zero():
                continue
            label = "".join(f"{PARTY_NAMES[p]}{b}" for p, b in enumerate(setting_bits(i, self.n)))
            terms.append(f"[{c}]{label}")
        return " + ".join(terms) if terms else "0"


def _as_coefficient(value, d: int) -> Coefficient:
    if isinstance(value, Coefficient):
        if value.d != d:
            raise ValueError("coefficient dimension does not match d")
        return value
    if isinstance(value, str):
        return parse_coefficient(value, d)
    values = list(value)
    if len(values) != d:
        raise ValueError(f"alpha list of length {len(values)} for d={d}")
    return Coefficient.from_alpha(values)


def _check_shape(f: BellFunction, g: BellFunction) -> None:
    if (f.n, f.d) != (g.n, g.d):
        raise ValueError(f"shape mismatch: (n={f.n}, d={f.d}) vs (n={g.n}, d={g.d})")


# ---------------------------------------------------------------- probability forms


@dataclass(frozen=True)
class ProbabilityForm:
    """sum_{s,r} weights[s][r] P(sum of outcomes under s = r) + constant."""

    n: int
    d: int
    weights: tuple[tuple[Fraction, ...], ...]
    constant: Fraction = Fraction(0)

    def __post_init__(self):
        if len(self.weights) != 2**self.n or any(len(w) != self.d for w in self.weights):
            raise ValueError("weights must have shape (2^n, d)")

    def weight_array(self) -> np.ndarray:
        return np.array([[float(x) for x in row] for row in self.weights])

    def canonical(self) -> "ProbabilityForm":
        """Move each setting's mean weight into the constant.

        Since sum_r P(.=r) = 1 for every setting, this leaves the functional
        unchanged on normalized tables.
        """
        rows = []
        const = Fraction(self.constant)
        for row in self.weights:
            mean = sum(row, Fraction(0)) / self.d
            rows.append(tuple(x - mean for x in row))
            const += mean
        return ProbabilityForm(self.n, self.d, tuple(rows), const)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "d": self.d,
            "coeffs": {
                setting_key(i, self.n): [format_rational(x) for x in row]
                for i, row in enumerate(self.weights)
            },
            "constant": format_rational(self.constant),
        }

    @classmethod
    def from_json(cls, data) -> "ProbabilityForm":
        n, d = int(data["n"]), int(data["d"])
        rows: list = [None] * 2**n
        for key, row in data["coeffs"].items():
            if len(row) != d:
                raise ValueError(f"setting {key} has {len(row)} weights, expected {d}")
            rows[setting_index(key)] = tuple(parse_rational(x) for x in row)
        if any(r is None for r in rows):
            raise ValueError("probability form is missing settings")
        return cls(n, d, tuple(rows), parse_rational(data.get("constant", "0")))


def to_probability_form(f: BellFunction) -> ProbabilityForm:
    """weights[s][r] = (d*alpha_{s,-r} - sum_k alpha_{s,k}) / (d-1), constant 0."""
    d = f.d
    rows = []
    for c in f.coeffs:
        total = sum(c.alpha, Fraction(0))
        rows.append(tuple((d * c.alpha[(-r) % d] - total) / (d - 1) for r in range(d)))
    return ProbabilityForm(f.n, d, tuple(rows), Fraction(0))


def forms_equivalent(p: ProbabilityForm, q: ProbabilityForm) -> Fraction | None:
    """Return the positive ratio lambda with lin(p) = lambda * lin(q), else None.

    Constants are ignored: two inequalities that differ by a rescaling and a
    constant shift are the same inequality once the bound is shifted too.
    """
    if (p.n, p.d) != (q.n, q.d):
        return None
    a = [x for row in p.canonical().weights for x in row]
    b = [x for row in q.canonical().weights for x in row]
    ratio = None
    for x, y in zip(a, b):
        if (x == 0) != (y == 0):
            return None
        if x == 0:
            continue
        r = x / y
        if ratio is None:
            ratio = r
        elif r != ratio:
            return None
    if ratio is None:
        return Fraction(1)
    return ratio if ratio > 0 else None


_TOKEN = re.compile(r"\s*(?:(?P<num>\d+(?:/\d+)?)|(?P<prob>P\(\s*[^()]*?\))|(?P<op>[-+*/()\[\]]))")
_PROB = re.compile(r"P\(\s*([A-Z]_?\d(?:\s*\+\s*[A-Z]_?\d)*)\s*=\s*(-?\d+)\s*\)")


def parse_probability_form(text: str, n: int, d: int) -> ProbabilityForm:
    """Parse a printed coincidence expression.

    Grammar: sums and differences of terms, where a term is an optional
    rational factor (``2``, ``1/6``, optionally followed by ``*``) applied to
    ``P(A0+B1+C0=r)``, a bracketed or parenthesised sub-expression, or
    nothing (a bare constant).  Party letters must appear in the order
    A, B, C, ...; residues are read mod d.  Example:
    ``"1/2*[P(A0+B0=0) - P(A0+B0=1) - 1]"``.
    """
    tokens = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ValueError(f"cannot parse probability form near {text[pos:pos + 30]!r}")
        kind = m.lastgroup
        tokens.append((kind, m.group(kind)))
        pos = m.end()
        while pos < len(text) and text[pos].isspace():
            pos += 1
    size = 2**n * d
    i = 0

    def peek():
        return tokens[i] if i < len(tokens) else (None, None)

    def prob(tok):
        m = _PROB.fullmatch(tok)
        if not m:
            raise ValueError(f"malformed probability term {tok!r}")
        labels = [x.strip().replace("_", "") for x in m.group(1).split("+")]
        if len(labels) != n:
            raise ValueError(f"term {tok!r} does not mention {n} parties")
        bits = []
        for p, lab in enumerate(labels):
            if lab[0] != PARTY_NAMES[p]:
                raise ValueError(f"unexpected party order in {tok!r}")
            bits.append(int(lab[1:]))
        vec = [Fraction(0)] * (size + 1)
        vec[setting_index(bits) * d + int(m.group(2)) % d] = Fraction(1)
        return vec

    def expr():
        nonlocal i
        acc = [Fraction(0)] * (size + 1)
        sign = 1
        if peek() == ("op", "+") or peek() == ("op", "-"):
            sign = -1 if peek()[1] == "-" else 1
            i += 1
        while True:
            t = term()
            acc = [a + sign * b for a, b in zip(acc, t)]
            if peek() == ("op", "+") or peek() == ("op", "-"):
                sign = -1 if peek()[1] == "-" else 1
                i += 1
            else:
                return acc

    def term():
        nonlocal i
        factor = Fraction(1)
        kind, tok = peek()
        if kind == "num":
            factor = Fraction(tok)
            i += 1
            if peek() == ("op", "/"):
                i += 1
                kind, tok = peek()
                if kind != "num":
                    raise ValueError("expected a number after '/'")
                factor /= Fraction(tok)
                i += 1
            if peek() == ("op", "*"):
                i += 1
            kind, tok = peek()
            if kind is None or (kind == "op" and tok in "+-)]"):
                vec = [Fraction(0)] * (size + 1)
                vec[size] = factor
                return vec
        if kind == "prob":
            i += 1
            vec = prob(tok)
        elif (kind, tok) in (("op", "("), ("op", "[")):
            close = ")" if tok == "(" else "]"
            i += 1
            vec = expr()
            if peek() != ("op", close):
                raise ValueError(f"unbalanced {tok!r} in probability form")
            i += 1
        else:
            raise ValueError(f"unexpected token {tok!r} in probability form")
        return [factor * x for x in vec]

    vec = expr()
    if i != len(tokens):
        raise ValueError(f"trailing tokens in probability form: {tokens[i:]}")
    rows = tuple(tuple(vec[s * d:(s + 1) * d]) for s in range(2**n))
    return ProbabilityForm(n, d, rows, vec[size])


# ---------------------------------------------------------------- tables and evaluation


@dataclass(frozen=True)
class ProbabilityTable:
    """p[s][r] = P(outcome sum under setting s equals r mod d)."""

    n: int
    d: int
    p: np.ndarray

    def __post_init__(self):
        if np.shape(self.p) != (2**self.n, self.d):
            raise ValueError(f"table shape {np.shape(self.p)} != {(2**self.n, self.d)}")

    @classmethod
    def deterministic(cls, strategy, d: int) -> "ProbabilityTable":
        strat = np.asarray(strategy, dtype=np.int64)
        n = strat.shape[0]
        t = coincidence_residues(strat, d)
        p = np.empty((2**n, d), dtype=object)
        p[:] = Fraction(0)
        for s, r in enumerate(t):
            p[s, r] = Fraction(1)
        return cls(n, d, p)

    @classmethod
    def uniform(cls, n: int, d: int) -> "ProbabilityTable":
        p = np.empty((2**n, d), dtype=object)
        p[:] = Fraction(1, d)
        return cls(n, d, p)

    def is_normalized(self, tol: float = 1e-12) -> bool:
        arr = np.asarray(self.p, dtype=float)
        return bool(np.all(arr >= -tol) and np.allclose(arr.sum(axis=1), 1.0, atol=tol))


def evaluate(pf: ProbabilityForm, table: ProbabilityTable):
    """Exact if the table holds Fractions, float otherwise."""
    if (pf.n, pf.d) != (table.n, table.d):
        raise ValueError("probability form and table shapes differ")
    p = table.p
    if np.asarray(p).dtype == object:
        total = Fraction(pf.constant)
        for s, row in enumerate(pf.weights):
            for r, w in enumerate(row):
                if w:
                    total += w * p[s][r]
        return total
    return float(np.sum(pf.weight_array() * np.asarray(p, dtype=float)) + float(pf.constant))


def coincidence_residues(strategy, d: int) -> np.ndarray:
    """t_s = sum_p outcome[p, s_p] mod d for every setting tuple s."""
    strat = np.asarray(strategy, dtype=np.int64)
    n = strat.shape[0]
    if strat.shape != (n, 2):
        raise ValueError("strategy must have shape (n, 2)")
    if np.any((strat < 0) | (strat >= d)):
        raise ValueError("strategy outcomes out of range")
    bits = np.array([setting_bits(i, n) for i in range(2**n)], dtype=np.int64)
    return strat[np.arange(n), bits].sum(axis=1) % d


def evaluate_deterministic(f: BellFunction, strategy) -> Fraction:
    """sum_s first_component(omega_s o v_{t_s})."""
    strat = np.asarray(strategy, dtype=np.int64)
    if strat.shape[0] != f.n:
        raise ValueError("strategy party count differs from the Bell function")
    t = coincidence_residues(strat, f.d)
    return sum(
        (first_component(coeff_shift(c, int(ts))) for c, ts in zip(f.coeffs, t)),
        Fraction(0),
    )


# ---------------------------------------------------------------- iteration and restriction


def restrict(f: BellFunction, k0: int, k1: int) -> BellFunction:
    """Fix the last party's outcomes to v_{k0} (setting 0) and v_{k1} (setting 1)."""
    if f.n < 2:
        raise ValueError("restriction needs at least two parties")
    d = f.d
    if not (0 <= k0 < d and 0 <= k1 < d):
        raise ValueError(f"outcome indices ({k0}, {k1}) out of range for d={d}")
    out = []
    for s in range(2 ** (f.n - 1)):
        out.append(coeff_shift(f.coeffs[2 * s], k0) + coeff_shift(f.coeffs[2 * s + 1], k1))
    return BellFunction(f.n - 1, d, tuple(out))


def _ramp(d: int, weights) -> Coefficient:
    alpha = [Fraction(0)] * d
    for k in range(1, d):
        alpha[k] = Fraction(weights(k))
    return Coefficient.from_alpha(alpha)


def iteration_kernels(d: int) -> tuple[Coefficient, Coefficient, Coefficient]:
    """(-sum (d-k) v_k, -sum k v_k, sum k v_k), each divided by d."""
    a = _ramp(d, lambda k: -(d - k)).scale(Fraction(1, d))
    b = _ramp(d, lambda k: -k).scale(Fraction(1, d))
    return a, b, -b


def iterate(f00: BellFunction, f01: BellFunction) -> BellFunction:
    """Build the (n+1)-party function whose (0,0) and (0,1) restrictions are f00, f01."""
    _check_shape(f00, f01)
    d = f00.d
    if not is_prime(d):
        raise ValueError(f"the iteration formula requires prime d, got {d}")
    a, b, c = iteration_kernels(d)
    out = []
    for x, y in zip(f00.coeffs, f01.coeffs):
        out.append(coeff_convolve(x, a) + coeff_convolve(y, b))
        out.append(coeff_convolve(x, b) + coeff_convolve(y, c))
    return BellFunction(f00.n + 1, d, tuple(out))


def closed_form_restriction(f00: BellFunction, f01: BellFunction, l: int) -> BellFunction:
    """I^{0,l} = -(v_1+...+v_{l-1}) f00 + (v_0+...+v_{l-1}) f01 for 1 <= l <= d-1.

    l = 0 returns f00.  Should agree with restrict(iterate(f00, f01), 0, l).
    """
    _check_shape(f00, f01)
    d = f00.d
    if l == 0:
        return f00
    if not 1 <= l < d:
        raise ValueError(f"l={l} out of range for d={d}")
    p = Coefficient.from_alpha([1 if 1 <= k < l else 0 for k in range(d)])
    q = Coefficient.from_alpha([1 if k < l else 0 for k in range(d)])
    out = tuple(
        coeff_convolve(q, y) - coeff_convolve(p, x) for x, y in zip(f00.coeffs, f01.coeffs)
    )
    return BellFunction(f00.n, d, out)


# ---------------------------------------------------------------- named families


def cglmp_function(d: int) -> BellFunction:
    """Two-party function whose probability form is equivalent to CGLMP."""
    alpha00 = [Fraction(0)] * d
    alpha01 = [Fraction(0)] * d
    for k in range(1, d):
        alpha00[d - k] -= k
        alpha01[k] -= k
    c00 = Coefficient.from_alpha(alpha00).scale(Fraction(1, d))
    c01 = Coefficient.from_alpha(alpha01).scale(Fraction(1, d))
    return BellFunction(2, d, (c00, c01, c01, -c01))


def swap_all_settings(f: BellFunction) -> BellFunction:
    """Relabel X_0 <-> X_1 for every party."""
    m = 2**f.n - 1
    return BellFunction(f.n, f.d, tuple(f.coeffs[i ^ m] for i in range(2**f.n)))


def mabk_function(n: int) -> BellFunction:
    """n-party MABK chain: I_2 is CHSH, I_{n} = iterate(I_{n-1}, swapped I_{n-1})."""
    if n < 2:
        raise ValueError("MABK needs n >= 2")
    half = Fraction(-1, 2)
    v1 = Coefficient.basis(1, 2)
    f = BellFunction(2, 2, (v1.scale(half), v1.scale(half), v1.scale(half), v1.scale(-half)))
    for _ in range(n - 2):
        f = iterate(f, swap_all_settings(f))
    return f


def integer_weights(f: BellFunction) -> tuple[np.ndarray, int]:
    """Probability weights scaled to int64 by their common denominator.

    Returns (W, den) with W[s, r] / den == to_probability_form(f).weights[s][r].
    """
    pf = to_probability_form(f)
    den = math.lcm(*(x.denominator for row in pf.weights for x in row))
    W = np.array([[int(x * den) for x in row] for row in pf.weights], dtype=np.int64)
    return W, den


__all__ = [
    "BellFunction",
    "ProbabilityForm",
    "ProbabilityTable",
    "closed_form_restriction",
    "cglmp_function",
    "coincidence_residues",
    "evaluate",
    "evaluate_deterministic",
    "forms_equivalent",
    "integer_weights",
    "iterate",
    "iteration_kernels",
    "mabk_function",
    "parse_probability_form",
    "restrict",
    "setting_bits",
    "setting_index",
    "setting_key",
    "swap_all_settings",
    "to_probability_form",
]
