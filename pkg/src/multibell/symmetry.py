"""Equivalence group of full-correlated Bell functions.

The group is generated by party permutations, per-party setting swaps and
per-observable outcome shifts a -> a + c mod d.  A :class:`Transformation`
applies shifts first, then swaps, then the party permutation:

    g(f)[s] = f[u] o v_{sum_p shift[p, u_p]},   u_p = s_{perm[p]} xor swap[p]

where ``perm[p]`` is the new position of old party p.

Orbits and canonical forms are computed by enumerating the group directly on
integer-scaled alpha arrays.  Outcome shifts have a kernel (shifting both
settings of party p by c_p with sum c_p = 0 does nothing), so only d^(n+1)
shift patterns need to be visited: shift[p, 0] = 0 for p >= 1.
"""

from __future__ import annotations

import itertools
import math
import re
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .algebra import Coefficient, coeff_shift
from .bell import PARTY_NAMES, BellFunction, setting_bits

DEFAULT_BUDGET = 10**7


class BudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class Transformation:
    perm: tuple[int, ...]
    swap: tuple[bool, ...]
    shift: tuple[tuple[int, int], ...]
    d: int

    def __post_init__(self):
        n = len(self.perm)
        if sorted(self.perm) != list(range(n)):
            raise ValueError(f"not a permutation: {self.perm}")
        if len(self.swap) != n or len(self.shift) != n:
            raise ValueError("perm, swap and shift must describe the same parties")

    @property
    def n(self) -> int:
        return len(self.perm)

    @classmethod
    def identity(cls, n: int, d: int) -> "Transformation":
        return cls(tuple(range(n)), (False,) * n, ((0, 0),) * n, d)

    @classmethod
    def make(cls, d: int, perm=None, swap=None, shift=None, n: int | None = None):
        n = n if n is not None else len(perm if perm is not None else swap if swap is not None else shift)
        perm = tuple(range(n)) if perm is None else tuple(int(p) for p in perm)
        swap = (False,) * n if swap is None else tuple(bool(b) for b in swap)
        shift = ((0, 0),) * n if shift is None else tuple((int(a) % d, int(b) % d) for a, b in shift)
        return cls(perm, swap, shift, d)

    def compose(self, other: "Transformation") -> "Transformation":
        """self o other: apply ``other`` first."""
        if (self.n, self.d) != (other.n, other.d):
            raise ValueError("cannot compose transformations of different shapes")
        n, d = self.n, self.d
        perm = tuple(self.perm[other.perm[p]] for p in range(n))
        swap = tuple(self.swap[other.perm[p]] ^ other.swap[p] for p in range(n))
        shift = tuple(
            tuple(
                (other.shift[p][b] + self.shift[other.perm[p]][b ^ other.swap[p]]) % d
                for b in (0, 1)
            )
            for p in range(n)
        )
        return Transformation(perm, swap, shift, d)

    __matmul__ = compose

    def inverse(self) -> "Transformation":
        n, d = self.n, self.d
        inv = [0] * n
        for p, q in enumerate(self.perm):
            inv[q] = p
        swap = tuple(self.swap[inv[p]] for p in range(n))
        shift = tuple(
            tuple((-self.shift[inv[p]][b ^ swap[p]]) % d for b in (0, 1)) for p in range(n)
        )
        return Transformation(tuple(inv), swap, shift, d)

    def source_map(self) -> list[tuple[int, int]]:
        """For each new setting index s: (old index u, total outcome shift)."""
        n, d = self.n, self.d
        out = []
        for s in range(2**n):
            bits = setting_bits(s, n)
            u = [bits[self.perm[p]] ^ self.swap[p] for p in range(n)]
            idx = 0
            for b in u:
                idx = 2 * idx + b
            out.append((idx, sum(self.shift[p][u[p]] for p in range(n)) % d))
        return out

    def to_json(self) -> dict:
        return {"perm": list(self.perm), "swap": list(self.swap), "shift": [list(x) for x in self.shift]}

    @classmethod
    def from_json(cls, data, d: int) -> "Transformation":
        return cls.make(d, data.get("perm"), data.get("swap"), data.get("shift"),
                        n=len(data.get("perm") or data.get("swap") or data.get("shift")))


def apply(g: Transformation, f: BellFunction) -> BellFunction:
    if (g.n, g.d) != (f.n, f.d):
        raise ValueError(f"transformation for (n={g.n}, d={g.d}) applied to (n={f.n}, d={f.d})")
    return BellFunction(f.n, f.d, tuple(coeff_shift(f.coeffs[u], t) for u, t in g.source_map()))


def group_order(n: int, d: int) -> int:
    return math.factorial(n) * 2**n * d ** (2 * n)


def generators(n: int, d: int) -> list[Transformation]:
    gens = []
    for p in range(n - 1):
        perm = list(range(n))
        perm[p], perm[p + 1] = perm[p + 1], perm[p]
        gens.append(Transformation.make(d, perm=perm, n=n))
    for p in range(n):
        swap = [False] * n
        swap[p] = True
        gens.append(Transformation.make(d, swap=swap, n=n))
        for b in (0, 1):
            shift = [[0, 0] for _ in range(n)]
            shift[p][b] = 1
            gens.append(Transformation.make(d, shift=shift, n=n))
    return gens


def random_transformation(n: int, d: int, rng: np.random.Generator) -> Transformation:
    return Transformation.make(
        d,
        perm=rng.permutation(n).tolist(),
        swap=rng.integers(0, 2, n).astype(bool).tolist(),
        shift=rng.integers(0, d, (n, 2)).tolist(),
    )


# ---------------------------------------------------------------- recipes

_SHIFT = re.compile(r"([a-z])_?\{?([01])\}?->Mod\[\1_?\{?\2\}?\+(\d+),(\d+)\]")
_SWAP = re.compile(r"([A-Z])_?\{?([01])\}?<->\1_?\{?([01])\}?")
_PERM = re.compile(r"([A-Z]{2,})->([A-Z]{2,})")


def _normalize_recipe(text: str) -> str:
    s = text
    for a, b in ((r"\leftrightarrow", "<->"), (r"\rightarrow", "->"), ("↔", "<->"), ("→", "->"),
                 (r"{\rm Mod}", "Mod"), (r"\{", "{"), (r"\}", "}"), ("/.", "")):
        s = s.replace(a, b)
    s = re.sub(r"\s+", "", s)
    return s.strip("{}")


def parse_recipe(text: str, n: int, d: int, *, sign: int = 1, labels: str = "new") -> Transformation:
    """Parse ``{a_1->Mod[a_1+2,3], B_0<->B_1, ABCD->CBAD}`` (LaTeX spellings accepted).

    ``x_i -> Mod[x_i + c, d]`` shifts observable X_i by sign*c; ``X_0 <-> X_1``
    swaps party X's settings; ``ABCD -> CBAD`` moves old party A to position C.
    With ``labels="new"`` (default) shift and swap letters name party positions
    after the permutation, which is the reading that reproduces every printed
    recipe containing a party map.  ``labels="old"`` reads them as the
    original parties.  Without a party map the two readings coincide.
    """
    body = _normalize_recipe(text)
    perm = list(range(n))
    shift = [[0, 0] for _ in range(n)]
    swap = [False] * n
    if not body:
        return Transformation.identity(n, d)
    for rule in _split_rules(body):
        m = _PERM.fullmatch(rule)
        if m:
            src, dst = m.groups()
            if len(src) != n or sorted(src) != sorted(dst) or src != PARTY_NAMES[:n]:
                raise ValueError(f"bad party permutation {rule!r}")
            perm = [PARTY_NAMES.index(dst[p]) for p in range(n)]
            continue
        m = _SHIFT.fullmatch(rule)
        if m:
            party, b, c, mod = m.groups()
            if int(mod) != d:
                raise ValueError(f"rule {rule!r} is mod {mod}, expected {d}")
            p = PARTY_NAMES.index(party.upper())
            if p >= n:
                raise ValueError(f"rule {rule!r} names a party beyond n={n}")
            shift[p][int(b)] = (shift[p][int(b)] + sign * int(c)) % d
            continue
        m = _SWAP.fullmatch(rule)
        if m:
            party, x, y = m.groups()
            if {x, y} != {"0", "1"}:
                raise ValueError(f"bad setting swap {rule!r}")
            p = PARTY_NAMES.index(party)
            if p >= n:
                raise ValueError(f"rule {rule!r} names a party beyond n={n}")
            swap[p] ^= True
            continue
        raise ValueError(f"cannot parse recipe rule {rule!r}")
    if labels == "new":
        # letters name positions after the permutation; move them back to old parties
        shift = [shift[perm[p]] for p in range(n)]
        swap = [swap[perm[p]] for p in range(n)]
    elif labels != "old":
        raise ValueError("labels must be 'old' or 'new'")
    return Transformation.make(d, perm=perm, swap=swap, shift=shift, n=n)


def _split_rules(body: str) -> list[str]:
    rules, depth, cur = [], 0, ""
    for ch in body:
        if ch == "[":
            depth += 1
        elif ch == "]":
            depth -= 1
        if ch == "," and depth == 0:
            rules.append(cur)
            cur = ""
        else:
            cur += ch
    if cur:
        rules.append(cur)
    return rules


# ---------------------------------------------------------------- integer encoding


def integer_alpha(f: BellFunction) -> tuple[np.ndarray, int]:
    """Alpha array scaled to integers by the common denominator."""
    den = math.lcm(*(a.denominator for c in f.coeffs for a in c.alpha))
    A = np.array([[int(a * den) for a in c.alpha] for c in f.coeffs], dtype=np.int64)
    return A, den


def _from_integer(A: np.ndarray, den: int, n: int, d: int) -> BellFunction:
    return BellFunction(n, d, tuple(
        Coefficient(d, tuple(Fraction(int(x), den) for x in row)) for row in A
    ))


def _small_dtype(A: np.ndarray):
    m = int(np.abs(A).max()) if A.size else 0
    for dt in (np.int8, np.int16, np.int32):
        if m <= np.iinfo(dt).max:
            return dt
    return np.int64


def _shift_patterns(n: int, d: int) -> np.ndarray:
    """Representatives of shifts modulo the kernel, shape (d^(n+1), n, 2)."""
    free = [(0, 0), (0, 1)] + [(p, 1) for p in range(1, n)]
    grid = np.array(list(itertools.product(range(d), repeat=len(free))), dtype=np.int64)
    out = np.zeros((len(grid), n, 2), dtype=np.int64)
    for k, (p, b) in enumerate(free):
        out[:, p, b] = grid[:, k]
    return out


def _images(A: np.ndarray, n: int, d: int):
    """Yield (perm, swap, images) with images of shape (d^(n+1), 2^n * d)."""
    shifts = _shift_patterns(n, d)
    bits = np.array([setting_bits(s, n) for s in range(2**n)], dtype=np.int64)
    k = np.arange(d)
    for perm in itertools.permutations(range(n)):
        for swap in itertools.product((0, 1), repeat=n):
            U = bits[:, list(perm)] ^ np.array(swap)[None, :]
            u_idx = U @ (1 << np.arange(n - 1, -1, -1))
            # T[g, s] = sum_p shift[g, p, U[s, p]]
            T = shifts[:, np.arange(n)[None, :], U].sum(axis=2) % d
            cols = (k[None, None, :] - T[:, :, None]) % d
            imgs = A[u_idx[None, :, None], cols]
            yield perm, swap, imgs.reshape(len(shifts), -1)


def reduced_group_size(n: int, d: int) -> int:
    return math.factorial(n) * 2**n * d ** (n + 1)


def _check_budget(n: int, d: int, budget: int) -> None:
    size = reduced_group_size(n, d)
    if size > budget:
        raise BudgetExceeded(f"group enumeration needs {size} elements, budget is {budget}")


@dataclass
class OrbitReport:
    size: int
    stabilizer_order: int
    group_order: int
    representatives: list[BellFunction] | None = None

    def to_json(self) -> dict:
        return {"size": self.size, "stabilizer_order": self.stabilizer_order,
                "group_order": self.group_order}


def orbit_arrays(f: BellFunction, budget: int = DEFAULT_BUDGET) -> tuple[np.ndarray, int]:
    """Distinct images as rows of a sorted integer array, plus the scale."""
    _check_budget(f.n, f.d, budget)
    A, den = integer_alpha(f)
    dt = _small_dtype(A)
    chunks = [np.unique(imgs.astype(dt), axis=0) for _, _, imgs in _images(A, f.n, f.d)]
    return np.unique(np.concatenate(chunks), axis=0), den


def orbit(f: BellFunction, budget: int = DEFAULT_BUDGET, representatives: bool = False) -> OrbitReport:
    rows, den = orbit_arrays(f, budget)
    G = group_order(f.n, f.d)
    reps = None
    if representatives:
        reps = [_from_integer(r.reshape(2**f.n, f.d), den, f.n, f.d) for r in rows]
    return OrbitReport(len(rows), G // len(rows), G, reps)


def orbit_members(f: BellFunction, budget: int = DEFAULT_BUDGET) -> list[BellFunction]:
    return orbit(f, budget, representatives=True).representatives or []


def _lexmin(rows: np.ndarray) -> np.ndarray:
    keep = np.arange(len(rows))
    for c in range(rows.shape[1]):
        col = rows[keep, c]
        keep = keep[col == col.min()]
        if len(keep) == 1:
            break
    return rows[keep[0]]


def canonical_form(f: BellFunction, budget: int = DEFAULT_BUDGET) -> BellFunction:
    """Lexicographically smallest image (settings by bitstring, alpha by index)."""
    _check_budget(f.n, f.d, budget)
    A, den = integer_alpha(f)
    best = None
    for _, _, imgs in _images(A, f.n, f.d):
        cand = _lexmin(imgs)
        if best is None or tuple(cand) < tuple(best):
            best = cand
    return _from_integer(best.reshape(2**f.n, f.d), den, f.n, f.d)


def find_transformation(f: BellFunction, g: BellFunction, budget: int = DEFAULT_BUDGET):
    """A Transformation t with apply(t, f) == g, or None."""
    if (f.n, f.d) != (g.n, g.d):
        return None
    _check_budget(f.n, f.d, budget)
    A, den = integer_alpha(f)
    B, den_b = integer_alpha(g)
    if den != den_b:
        return None
    target = B.ravel()
    shifts = _shift_patterns(f.n, f.d)
    for perm, swap, imgs in _images(A, f.n, f.d):
        hit = np.flatnonzero((imgs == target[None, :]).all(axis=1))
        if len(hit):
            t = Transformation.make(f.d, perm=perm, swap=swap, shift=shifts[hit[0]].tolist(), n=f.n)
            return t
    return None


def invariant_certificate(f: BellFunction) -> tuple:
    """Sorted multiset of cyclic-shift classes of the alpha vectors.

    Every group element permutes settings and rotates each alpha vector, so
    the multiset is invariant.  Distinct certificates prove inequivalence.
    """
    classes = []
    for c in f.coeffs:
        rotations = [coeff_shift(c, k).alpha for k in range(f.d)]
        classes.append(min(rotations))
    return tuple(sorted(Counter(classes).items()))


def equivalent(f: BellFunction, g: BellFunction, budget: int = DEFAULT_BUDGET) -> str:
    """'equivalent', 'inequivalent' or 'unknown' (budget too small for a decision)."""
    if (f.n, f.d) != (g.n, g.d):
        return "inequivalent"
    if invariant_certificate(f) != invariant_certificate(g):
        return "inequivalent"
    try:
        return "equivalent" if canonical_form(f, budget) == canonical_form(g, budget) else "inequivalent"
    except BudgetExceeded:
        return "unknown"


__all__ = [
    "BudgetExceeded",
    "OrbitReport",
    "Transformation",
    "apply",
    "canonical_form",
    "equivalent",
    "find_transformation",
    "generators",
    "group_order",
    "integer_alpha",
    "invariant_certificate",
    "orbit",
    "orbit_arrays",
    "orbit_members",
    "parse_recipe",
    "random_transformation",
    "reduced_group_size",
]
