"""Projectors built from permutation sums, and dense Hermitian eigen-helpers.

Everything here is constructed from exact integer permutation sums and
divided by the group order once, so projector identities survive the
conversion to floating point essentially unharmed.
"""

from __future__ import annotations

import itertools
import math
from typing import Callable, Sequence

import numpy as np
import scipy.linalg

from .combinatorics import Partition, check_partition, dim_specht, sn_character
from .diagrams import MAX_DENSE_DEFAULT, GuardExceeded, Perm, permutation_matrix
from .scenario import check_hermitian

ORTHONORMALITY_TOL = 1e-10


def _weighted_permutation_sum(d: int, k: int, weight: Callable[[Perm], int]) -> np.ndarray:
    total = d**k
    acc = np.zeros((total, total), dtype=np.int64)
    for images in itertools.permutations(range(k)):
        pi = Perm(images)
        w = weight(pi)
        if w:
            acc += w * permutation_matrix(pi, [d] * k)
    return acc


def sym_projector(d: int, k: int, max_dense: int = MAX_DENSE_DEFAULT) -> np.ndarray:
    """Projector onto the symmetric subspace of (C^d)^⊗k."""
    if d < 1 or k < 1:
        raise ValueError("d and k must be positive")
    if d**k > max_dense:
        raise GuardExceeded(f"dense dimension {d**k} exceeds max_dense = {max_dense}")
    acc = _weighted_permutation_sum(d, k, lambda pi: 1)
    return acc / math.factorial(k)


def isotypic_projector(
    lam: Sequence[int], d: int, max_dense: int = MAX_DENSE_DEFAULT
) -> np.ndarray:
    """Central-idempotent projector onto the lam-isotypic block of (C^d)^⊗k.

    (dim_specht(lam)/k!) * sum_pi chi^lam(pi) T(pi); rank is
    dim_specht(lam) * dim_weyl(lam, d), zero when lam has more than d rows.
    """
    lam = check_partition(lam)
    k = sum(lam)
    if d**k > max_dense:
        raise GuardExceeded(f"dense dimension {d**k} exceeds max_dense = {max_dense}")
    chi_cache: dict[tuple[int, ...], int] = {}

    def weight(pi: Perm) -> int:
        ct = pi.cycle_type()
        if ct not in chi_cache:
            chi_cache[ct] = sn_character(lam, ct)
        return chi_cache[ct]

    acc = _weighted_permutation_sum(d, k, weight)
    return dim_specht(lam) * acc / math.factorial(k)


def _gram_schmidt(columns: np.ndarray, tol: float = ORTHONORMALITY_TOL) -> np.ndarray:
    """Modified Gram-Schmidt with one re-orthogonalization pass; drops
    columns whose residual norm falls below tol."""
    out = []
    for j in range(columns.shape[1]):
        v = columns[:, j].astype(complex)
        for _ in range(2):
            for u in out:
                v = v - u * (u.conj() @ v)
        norm = np.linalg.norm(v)
        if norm > tol:
            out.append(v / norm)
    return np.column_stack(out) if out else np.zeros((columns.shape[0], 0), dtype=complex)


def subspace_sym_projector(
    basis: Sequence[np.ndarray], k: int, max_dense: int = MAX_DENSE_DEFAULT
) -> np.ndarray:
    """Projector onto the symmetric power of span(basis) inside the ambient
    k-fold tensor space.

    Built by symmetrizing k-fold products of the basis vectors over index
    multisets and orthonormalizing the results.
    """
    vecs = [np.asarray(v, dtype=complex).ravel() for v in basis]
    if not vecs or k < 1:
        raise ValueError("need a nonempty basis and positive k")
    dim_ambient = vecs[0].size
    if any(v.size != dim_ambient for v in vecs):
        raise ValueError("basis vectors must share one ambient dimension")
    gram = np.array([[u.conj() @ v for v in vecs] for u in vecs])
    if np.max(np.abs(gram - np.eye(len(vecs)))) > ORTHONORMALITY_TOL:
        raise ValueError(
            f"basis must be orthonormal within {ORTHONORMALITY_TOL}"
        )
    total = dim_ambient**k
    if total > max_dense:
        raise GuardExceeded(f"dense dimension {total} exceeds max_dense = {max_dense}")

    cols = []
    for multiset in itertools.combinations_with_replacement(range(len(vecs)), k):
        w = np.zeros(total, dtype=complex)
        for arrangement in set(itertools.permutations(multiset)):
            prod = np.array([1.0 + 0j])
            for idx in arrangement:
                prod = np.kron(prod, vecs[idx])
            w += prod
        cols.append(w / np.linalg.norm(w))
    q = _gram_schmidt(np.column_stack(cols))
    return q @ q.conj().T


def _spectral_norm_lower_bound(m: np.ndarray, iters: int = 12) -> float:
    """Power-iteration lower bound on the spectral norm (deterministic start)."""
    d = m.shape[0]
    v = np.ones(d) + 1e-3 * np.cos(np.arange(d))
    v = v / np.linalg.norm(v)
    est = 0.0
    for _ in range(iters):
        w = m @ v
        est = float(np.linalg.norm(w))
        if est == 0.0:
            return 0.0
        v = w / est
    return est


def min_eigenvalue(op: np.ndarray) -> tuple[float, np.ndarray]:
    """Smallest eigenvalue and a unit eigenvector of a Hermitian matrix.

    Solver failures are surfaced (scipy raises LinAlgError); the residual
    ||op v - val v|| is checked against 1e-9 times a spectral-norm lower
    bound, which is stricter than checking against the norm itself.
    """
    m = check_hermitian(op)
    d = m.shape[0]
    if d <= 64:
        vals, vecs = np.linalg.eigh(m)
        val, vec = float(vals[0]), vecs[:, 0]
    else:
        vals, vecs = scipy.linalg.eigh(m, subset_by_index=(0, 0))
        val, vec = float(vals[0]), vecs[:, 0]
    resid = float(np.linalg.norm(m @ vec - val * vec))
    scale = max(_spectral_norm_lower_bound(m), abs(val))
    if resid > 1e-9 * max(scale, 1e-300):
        raise ArithmeticError(
            f"eigenvector residual {resid:.3e} exceeds 1e-9 * {scale:.3e}"
        )
    return val, vec
