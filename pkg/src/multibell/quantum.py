"""GHZ coincidence statistics under symmetric multiport beam splitters.

Each party measures by applying a diagonal phase U(phi) followed by the
d-point quantum Fourier transform.  On the GHZ state only the per-level
phase sum Phi_j = sum_parties phi_j matters, and

    P(sum of outcomes = r) = |sum_j exp(i(2 pi j r / d + Phi_j))|^2 / d^2,

which expands to the cosine formula in :func:`coincidence_probability`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.optimize import minimize

from .algebra import is_prime, outcome_vector
from .bell import BellFunction, setting_bits, to_probability_form
from .lhv import DEFAULT_BUDGET, lhv_bound

TWO_PI = 2 * np.pi


# ---------------------------------------------------------------- closed form and oracle


def coincidence_probability(phases, s, r: int) -> float:
    """Cosine closed form for P(sum of outcomes under s = r) on GHZ."""
    phases = np.asarray(phases, dtype=float)
    n, _, d = phases.shape
    bits = setting_bits(s, n) if isinstance(s, int) else tuple(s)
    Phi = sum(phases[p, b] for p, b in enumerate(bits))
    total = float(d)
    for t in range(d):
        for u in range(t + 1, d):
            total += 2 * math.cos(Phi[u] - Phi[t] + 2 * (u - t) * r * math.pi / d)
    return total / d**2


def coincidence_table(phases) -> np.ndarray:
    """All P(s, r) at once, shape (2^n, d)."""
    phases = np.asarray(phases, dtype=float)
    n, _, d = phases.shape
    Phi = _phase_sums(phases)
    A = np.exp(1j * Phi) @ _dft(d)
    return np.abs(A) ** 2 / d**2


def _dft(d: int) -> np.ndarray:
    j = np.arange(d)
    return np.exp(2j * np.pi * np.outer(j, j) / d)


def _bits_matrix(n: int) -> np.ndarray:
    return np.array([setting_bits(s, n) for s in range(2**n)], dtype=np.int64)


def _phase_sums(phases: np.ndarray) -> np.ndarray:
    n = phases.shape[0]
    bits = _bits_matrix(n)
    return phases[np.arange(n)[None, :], bits].sum(axis=1)


def ghz_state(n: int, d: int) -> np.ndarray:
    psi = np.zeros(d**n, dtype=complex)
    stride = sum(d**k for k in range(n))
    psi[np.arange(d) * stride] = 1 / np.sqrt(d)
    return psi


def measurement_unitary(phi) -> np.ndarray:
    """[U]_{a j} = exp(2 pi i a j / d) exp(i phi_j) / sqrt(d)."""
    phi = np.asarray(phi, dtype=float)
    d = len(phi)
    return _dft(d) * np.exp(1j * phi)[None, :] / np.sqrt(d)


def oracle_distribution(state, phases, s) -> np.ndarray:
    """Joint outcome distribution, shape (d,)*n, by explicit state-vector evolution."""
    phases = np.asarray(phases, dtype=float)
    n, _, d = phases.shape
    psi = np.asarray(state, dtype=complex)
    if psi.shape != (d**n,):
        raise ValueError(f"state has {psi.shape} amplitudes, expected {d**n}")
    bits = setting_bits(s, n) if isinstance(s, int) else tuple(s)
    psi = psi.reshape((d,) * n)
    for p, b in enumerate(bits):
        U = measurement_unitary(phases[p, b])
        psi = np.moveaxis(np.tensordot(U, psi, axes=([1], [p])), 0, p)
    return np.abs(psi) ** 2


def oracle_probability(state, phases, s, outcomes) -> float:
    return float(oracle_distribution(state, phases, s)[tuple(outcomes)])


def oracle_coincidence(state, phases, s) -> np.ndarray:
    """Aggregate the joint distribution into residues of the outcome sum."""
    dist = oracle_distribution(state, phases, s)
    n, d = dist.ndim, dist.shape[0]
    grids = np.indices(dist.shape).sum(axis=0) % d
    return np.bincount(grids.ravel(), weights=dist.ravel(), minlength=d)


# ---------------------------------------------------------------- Bell values


def quantum_value(f: BellFunction, phases) -> float:
    pf = to_probability_form(f)
    return float(np.sum(pf.weight_array() * coincidence_table(phases)) + float(pf.constant))


def white_noise_value(f: BellFunction) -> float:
    pf = to_probability_form(f)
    return float(pf.weight_array().sum() / f.d + float(pf.constant))


class _Objective:
    """Negative Bell value and gradient over gauge-fixed phases (phi_0 = 0)."""

    def __init__(self, W: np.ndarray, n: int, d: int):
        self.W, self.n, self.d = W, n, d
        self.F = _dft(d)
        self.bits = _bits_matrix(n)
        # S[p, b, s] = 1 iff tuple s uses setting b for party p
        S = np.zeros((n, 2, 2**n))
        for s, row in enumerate(self.bits):
            S[np.arange(n), row, s] = 1.0
        self.S = S

    def phases(self, x: np.ndarray) -> np.ndarray:
        ph = np.zeros((self.n, 2, self.d))
        ph[:, :, 1:] = x.reshape(self.n, 2, self.d - 1)
        return ph

    def __call__(self, x: np.ndarray):
        ph = self.phases(x)
        Phi = ph[np.arange(self.n)[None, :], self.bits].sum(axis=1)
        E = np.exp(1j * Phi)
        A = E @ self.F
        d2 = self.d**2
        value = np.sum(self.W * np.abs(A) ** 2) / d2
        # dV/dPhi_{s j} = (2/d^2) Re(i E_sj sum_r W_sr conj(A_sr) F_jr)
        G = -2.0 / d2 * np.imag(E * ((self.W * np.conj(A)) @ self.F.T))
        grad = np.einsum("pbs,sj->pbj", self.S, G)[:, :, 1:]
        return -value, -grad.ravel()


@dataclass
class QuantumReport:
    nl_psi: float
    nl_mix: float
    vc: float
    violation: bool
    best_phases: np.ndarray
    restarts_used: int
    lhv: Fraction | None = None
    converged: int = 0
    values: list[float] = field(default_factory=list, repr=False)

    def to_json(self) -> dict:
        return {
            "nl_psi": self.nl_psi,
            "nl_mix": self.nl_mix,
            "vc": self.vc,
            "violation": self.violation,
            "lhv": None if self.lhv is None else str(self.lhv),
            "restarts_used": self.restarts_used,
            "converged": self.converged,
            "best_phases": np.mod(self.best_phases, TWO_PI).tolist(),
        }


def critical_visibility(L, nl_psi: float, nl_mix: float) -> tuple[float, bool]:
    """(v_c, violated).  v_c is clipped to 1 when the GHZ value does not beat L."""
    if nl_psi == nl_mix:
        raise ZeroDivisionError("GHZ and white-noise values coincide")
    L = float(L)
    if nl_psi <= L:
        return 1.0, False
    return (L - nl_mix) / (nl_psi - nl_mix), True


def seed_points(n: int, d: int, restarts: int, rng: np.random.Generator) -> np.ndarray:
    """Starting points: half linear ramps phi_j = j * c * pi/(2d), half uniform."""
    k = 2 * n * (d - 1)
    pts = np.empty((restarts, k))
    n_lin = restarts // 2
    j = np.arange(1, d)
    for i in range(restarts):
        if i < n_lin:
            slopes = rng.integers(0, 4 * d, size=(n, 2)) * np.pi / (2 * d)
            pts[i] = (slopes[:, :, None] * j[None, None, :]).ravel()
        else:
            pts[i] = rng.uniform(0, TWO_PI, size=k)
    return pts


def maximize_value(
    f: BellFunction,
    restarts: int = 64,
    tol: float = 1e-9,
    seed: int = 0,
    maxiter: int = 2000,
    starts: np.ndarray | None = None,
):
    """Multistart L-BFGS over the 2n(d-1) gauge-fixed phases.

    Returns (best value, best phases, per-restart values, converged count).
    Ties are broken by lowest restart index.
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    pf = to_probability_form(f)
    W = pf.weight_array()
    obj = _Objective(W, f.n, f.d)
    rng = np.random.default_rng(seed)
    if starts is None:
        starts = seed_points(f.n, f.d, restarts, rng)
    best_val, best_x, values, conv = -np.inf, None, [], 0
    for x0 in starts:
        res = minimize(obj, x0, jac=True, method="L-BFGS-B",
                       options={"maxiter": maxiter, "ftol": tol * 1e-3, "gtol": tol})
        v = -float(res.fun) + float(pf.constant)
        values.append(v)
        conv += bool(res.success)
        if v > best_val + 1e-12:
            best_val, best_x = v, res.x
    return best_val, obj.phases(best_x), values, conv


def optimize_phases(
    f: BellFunction,
    restarts: int = 64,
    tol: float = 1e-9,
    seed: int = 0,
    L: Fraction | None = None,
    budget: int = DEFAULT_BUDGET,
) -> QuantumReport:
    if L is None:
        L = lhv_bound(f, budget).bound
    best, phases, values, conv = maximize_value(f, restarts, tol, seed)
    mix = white_noise_value(f)
    vc, violated = critical_visibility(L, best, mix)
    return QuantumReport(best, mix, vc, violated, phases, restarts, Fraction(L), conv, values)


# ---------------------------------------------------------------- projector identity


def _geometric(Y: np.ndarray) -> np.ndarray:
    """Map an operator-valued group-ring element (d, m, m) to its d-1 geometric components."""
    d = Y.shape[0]
    V = np.array([outcome_vector(k, d).components for k in range(d)])
    return np.einsum("kc,kab->cab", V, Y)


def verify_projector_identity(d: int, trials: int = 50, seed: int = 0) -> bool:
    """Check v_0 Pi_i = (1/d) sum_j v_{-ij} o X^j for random orthonormal bases.

    X = sum_t v_t Pi_t is stored as the operator array X[k] = Pi_k, and
    X^j = sum_t v_{jt mod d} Pi_t.  Composition with v_c rolls the array.
    """
    if not is_prime(d):
        raise ValueError(f"the projector identity needs prime d, got {d}")
    rng = np.random.default_rng(seed)
    for trial in range(trials):
        if trial == 0:
            U = np.eye(d, dtype=complex)
        else:
            Z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
            U, _ = np.linalg.qr(Z)
        Pi = np.einsum("at,bt->tab", U, U.conj())
        powers = []
        for j in range(d):
            Xj = np.zeros_like(Pi)
            for t in range(d):
                Xj[(j * t) % d] += Pi[t]
            powers.append(Xj)
        for i in range(d):
            rhs = sum(np.roll(powers[j], (-i * j) % d, axis=0) for j in range(d)) / d
            lhs = np.zeros_like(Pi)
            lhs[0] = Pi[i]
            if not np.allclose(_geometric(lhs), _geometric(rhs), atol=1e-10, rtol=0):
                return False
    return True


__all__ = [
    "QuantumReport",
    "coincidence_probability",
    "coincidence_table",
    "critical_visibility",
    "ghz_state",
    "maximize_value",
    "measurement_unitary",
    "optimize_phases",
    "oracle_coincidence",
    "oracle_distribution",
    "oracle_probability",
    "quantum_value",
    "seed_points",
    "verify_projector_identity",
    "white_noise_value",
]
