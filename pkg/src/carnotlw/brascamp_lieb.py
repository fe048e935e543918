"""Brascamp-Lieb data, feasibility checks, and the Gaussian constant.

A datum is a family of surjective linear maps L_j: R^k -> R^{k_j} with
nonnegative exponents q_j.  The constant is computed as the supremum of the
Gaussian quotient

    prod_j det(A_j)^{q_j/2} / det(sum_j q_j L_j^T A_j L_j)^{1/2}

over positive definite A_j, which by Gaussian extremisability equals the full
constant.  Geometric data (each L_j a coordinate-type partial isometry with
sum q_j L_j^T L_j = Id) have constant exactly 1.

The optimiser is a multi-start projected ascent in log-Cholesky coordinates:
each A_j = C_j C_j^T with C_j lower triangular and log-parametrised diagonal,
so every parameter vector is a valid positive definite input.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .group import CorankGroup

__all__ = [
    "BLDatum",
    "GaussianInput",
    "BLEstimate",
    "datum_from_json",
    "datum_to_json",
    "check_scaling",
    "check_geometric",
    "check_dimension_sampled",
    "gaussian_quotient",
    "bl_constant",
    "lw_datum",
    "pair_deletion_datum",
    "corank_linearized_datum",
]


@dataclass(frozen=True)
class BLDatum:
    """Maps and exponents (L_j: R^k -> R^{k_j}, q_j >= 0)."""

    k: int
    maps: tuple[np.ndarray, ...]
    exps: tuple[float, ...]

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"ambient dimension must be >= 1, got {self.k}")
        maps = tuple(np.asarray(m, dtype=float) for m in self.maps)
        exps = tuple(float(q) for q in self.exps)
        if not maps:
            raise ValueError("datum needs at least one map")
        if len(maps) != len(exps):
            raise ValueError(f"{len(maps)} maps but {len(exps)} exponents")
        for m in maps:
            if m.ndim != 2 or m.shape[1] != self.k:
                raise ValueError(f"maps must have {self.k} columns, got {m.shape}")
            if m.shape[0] > self.k:
                raise ValueError(f"map target dimension {m.shape[0]} exceeds k={self.k}")
            if np.linalg.matrix_rank(m) != m.shape[0]:
                raise ValueError("maps must be surjective (full row rank)")
        if any(q < 0 for q in exps):
            raise ValueError(f"exponents must be nonnegative, got {exps}")
        for m in maps:
            m.flags.writeable = False
        object.__setattr__(self, "maps", maps)
        object.__setattr__(self, "exps", exps)

    @property
    def m(self) -> int:
        return len(self.maps)

    @property
    def target_dims(self) -> tuple[int, ...]:
        return tuple(m.shape[0] for m in self.maps)


@dataclass(frozen=True)
class GaussianInput:
    """One symmetric positive definite matrix per map of a datum."""

    mats: tuple[np.ndarray, ...]

    def __post_init__(self):
        mats = tuple(np.asarray(a, dtype=float) for a in self.mats)
        for a in mats:
            if a.ndim != 2 or a.shape[0] != a.shape[1]:
                raise ValueError(f"matrices must be square, got {a.shape}")
            if not np.allclose(a, a.T, atol=1e-12):
                raise ValueError("matrices must be symmetric (within 1e-12)")
            if np.linalg.eigvalsh(a).min() <= 0:
                raise ValueError("matrices must be positive definite")
        for a in mats:
            a.flags.writeable = False
        object.__setattr__(self, "mats", mats)


@dataclass(frozen=True)
class BLEstimate:
    estimate: float
    argmax: Optional[GaussianInput]
    converged: bool
    note: str = ""


def datum_from_json(text: str) -> BLDatum:
    try:
        obj = json.loads(text)
        return BLDatum(int(obj["k"]), tuple(obj["maps"]), tuple(obj["exps"]))
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise ValueError(f"invalid datum description: {exc}") from exc


def datum_to_json(datum: BLDatum) -> str:
    return json.dumps(
        {
            "k": datum.k,
            "maps": [m.tolist() for m in datum.maps],
            "exps": list(datum.exps),
        },
        sort_keys=True,
    )


def check_scaling(datum: BLDatum, tol: float = 1e-12) -> bool:
    """Whether sum q_j k_j equals the ambient dimension (finiteness needs it)."""
    total = sum(q * kj for q, kj in zip(datum.exps, datum.target_dims))
    return abs(total - datum.k) <= tol


def check_geometric(datum: BLDatum, tol: float = 1e-10) -> bool:
    """L_j L_j^T = Id on every target and sum q_j L_j^T L_j = Id on R^k."""
    for m in datum.maps:
        if not np.allclose(m @ m.T, np.eye(m.shape[0]), atol=tol):
            return False
    frame = sum(q * (m.T @ m) for q, m in zip(datum.exps, datum.maps))
    return np.allclose(frame, np.eye(datum.k), atol=tol)


def check_dimension_sampled(
    datum: BLDatum,
    subspaces: Sequence[np.ndarray] = (),
    n_random: int = 25,
    seed: int = 0,
    tol: float = 1e-9,
) -> list[dict]:
    """Test dim V <= sum q_j dim(L_j V) on given plus random subspaces.

    Subspaces are (k, dim) bases.  Returns one record per violated subspace;
    an empty list means no counterexample was found (not a proof).
    """
    rng = np.random.default_rng(seed)
    bases = [np.asarray(b, dtype=float) for b in subspaces]
    for _ in range(n_random):
        dim = int(rng.integers(1, datum.k + 1))
        bases.append(rng.standard_normal((datum.k, dim)))
    violations = []
    for basis in bases:
        if basis.ndim == 1:
            basis = basis[:, None]
        dim_v = int(np.linalg.matrix_rank(basis, tol=tol))
        bound = sum(
            q * int(np.linalg.matrix_rank(m @ basis, tol=tol))
            for q, m in zip(datum.exps, datum.maps)
        )
        if dim_v > bound + 1e-12:
            violations.append({"basis": basis, "dim": dim_v, "bound": bound})
    return violations


def gaussian_quotient(datum: BLDatum, gin: GaussianInput) -> float:
    """The ratio of the two sides of the inequality on centred Gaussians."""
    if len(gin.mats) != datum.m:
        raise ValueError(f"need {datum.m} matrices, got {len(gin.mats)}")
    for a, kj in zip(gin.mats, datum.target_dims):
        if a.shape[0] != kj:
            raise ValueError(f"matrix shape {a.shape} does not match target dim {kj}")
    log_q = _log_quotient(datum, gin.mats)
    if log_q == -math.inf:
        raise ValueError("denominator matrix is singular")
    return math.exp(log_q)


def _log_quotient(datum: BLDatum, mats: Sequence[np.ndarray]) -> float:
    acc = 0.0
    m_sum = np.zeros((datum.k, datum.k))
    for q, lmap, a in zip(datum.exps, datum.maps, mats):
        sign, logdet = np.linalg.slogdet(a)
        if sign <= 0:
            return -math.inf
        acc += q * logdet
        m_sum += q * (lmap.T @ a @ lmap)
    sign, logdet_m = np.linalg.slogdet(m_sum)
    if sign <= 0:
        return -math.inf
    return 0.5 * (acc - logdet_m)


# --- log-Cholesky coordinates ----------------------------------------------

def _n_params(kj: int) -> int:
    return kj * (kj + 1) // 2


def _theta_to_mats(datum: BLDatum, theta: np.ndarray) -> list[np.ndarray]:
    mats = []
    pos = 0
    for kj in datum.target_dims:
        npar = _n_params(kj)
        params = theta[pos : pos + npar]
        pos += npar
        c = np.zeros((kj, kj))
        c[np.tril_indices(kj)] = params
        diag = np.clip(np.diagonal(c), -200, 200)
        c[np.diag_indices(kj)] = np.exp(diag)
        mats.append(c @ c.T)
    return mats


def _objective(datum: BLDatum, theta: np.ndarray) -> float:
    return _log_quotient(datum, _theta_to_mats(datum, theta))


def bl_constant(
    datum: BLDatum,
    n_starts: int = 4,
    max_iter: int = 400,
    seed: int = 0,
    grad_tol: float = 1e-8,
    divergence_cap: float = 50.0,
) -> BLEstimate:
    """Estimate the constant by multi-start ascent over Gaussian inputs.

    Returns an infinite estimate immediately when the scaling condition
    fails, or when sampled subspaces witness a dimension-condition failure,
    or when the ascent pushes the log-quotient past ``divergence_cap``.
    The estimate is monotone in the iteration count: the best quotient seen
    is never discarded.
    """
    if not check_scaling(datum):
        return BLEstimate(math.inf, None, True, "scaling condition fails")
    frame = sum(q * (m.T @ m) for q, m in zip(datum.exps, datum.maps))
    if np.linalg.eigvalsh(frame).min() < 1e-12:
        return BLEstimate(
            math.inf, None, True,
            "maps do not span the ambient space (dimension condition fails)",
        )
    witnesses = check_dimension_sampled(datum, seed=seed)
    if witnesses:
        return BLEstimate(
            math.inf, None, True,
            f"dimension condition fails on {len(witnesses)} sampled subspaces",
        )

    rng = np.random.default_rng(seed)
    total_params = sum(_n_params(kj) for kj in datum.target_dims)
    starts = [np.zeros(total_params)]
    starts += [0.5 * rng.standard_normal(total_params) for _ in range(n_starts - 1)]

    best_val = -math.inf
    best_theta = None
    converged = False
    for theta in starts:
        theta = theta.copy()
        val = _objective(datum, theta)
        step = 0.25
        for _ in range(max_iter):
            grad = _fd_gradient(datum, theta)
            gnorm = float(np.linalg.norm(grad))
            if gnorm < grad_tol:
                converged = True
                break
            improved = False
            while step > 1e-14:
                cand = theta + step * grad / max(gnorm, 1e-30)
                cand_val = _objective(datum, cand)
                if cand_val > val:
                    theta, val = cand, cand_val
                    improved = True
                    step = min(step * 2.0, 1.0)
                    break
                step *= 0.5
            if val > divergence_cap:
                return BLEstimate(
                    math.inf, None, True,
                    "quotient grows unboundedly (dimension condition fails)",
                )
            if not improved:
                converged = True
                break
        if val > best_val:
            best_val, best_theta = val, theta

    if best_theta is None or not math.isfinite(best_val):
        return BLEstimate(
            math.inf, None, True,
            "no finite Gaussian quotient found (dimension condition fails)",
        )
    argmax = GaussianInput(tuple(_theta_to_mats(datum, best_theta)))
    return BLEstimate(math.exp(best_val), argmax, converged)


def _fd_gradient(datum: BLDatum, theta: np.ndarray, h: float = 1e-6) -> np.ndarray:
    grad = np.zeros_like(theta)
    for i in range(theta.size):
        up = theta.copy()
        dn = theta.copy()
        up[i] += h
        dn[i] -= h
        fu = _objective(datum, up)
        fd = _objective(datum, dn)
        if not (math.isfinite(fu) and math.isfinite(fd)):
            grad[i] = 0.0
        else:
            grad[i] = (fu - fd) / (2 * h)
    return grad


# --- canonical data ---------------------------------------------------------

def _deletion_map(k: int, drop: Sequence[int]) -> np.ndarray:
    keep = [i for i in range(k) if i not in set(drop)]
    return np.eye(k)[keep]


def lw_datum(k: int) -> BLDatum:
    """k coordinate-deletion maps R^k -> R^{k-1} with exponents 1/(k-1)."""
    if k < 2:
        raise ValueError(f"need k >= 2, got {k}")
    maps = tuple(_deletion_map(k, [j]) for j in range(k))
    return BLDatum(k, maps, (1.0 / (k - 1),) * k)


def pair_deletion_datum(n: int) -> BLDatum:
    """n pair-deletion maps R^{2n} -> R^{2n-2} with exponents 1/(n-1)."""
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    maps = tuple(_deletion_map(2 * n, [2 * j, 2 * j + 1]) for j in range(n))
    return BLDatum(2 * n, maps, (1.0 / (n - 1),) * n)


def corank_linearized_datum(G: CorankGroup) -> BLDatum:
    """Differentials at the identity of the group's projection family.

    Every projection linearises to a coordinate deletion on R^(d+2n+1) (the
    pair shear is quadratic, so its differential vanishes at the identity),
    giving the deletion datum with exponents 1/(d+2n).
    """
    return lw_datum(G.topo_dim)
