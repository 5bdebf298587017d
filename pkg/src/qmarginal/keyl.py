"""State-discrimination divergence from leading principal minors.

The divergence K(rho||sigma) compares the spectrum of rho against the
leading principal minors of sigma rotated into rho's eigenbasis.  It is
nonnegative, vanishes only at sigma = rho, reduces to the classical
relative entropy for commuting pairs, and controls an explicit
discrimination ratio through integer partition approximations of the
spectrum.  All of that machinery lives here, along with a brute-force
projector oracle used by the tests.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .combinatorics import (
    Partition,
    check_partition,
    check_sorted_cone,
    check_spectrum,
    dim_specht,
    finite_diffs,
    partition_from_spectrum,
    snap_ceil,
)
from .diagrams import MAX_DENSE_DEFAULT, GuardExceeded, Perm, permutation_matrix
from .operators import _gram_schmidt
from .scenario import ProductState, assemble_product, check_density, check_hermitian, tau_map, haar_sample_pure

UNITARY_TOL = 1e-10


def principal_minors(sigma: np.ndarray) -> np.ndarray:
    """Determinants of the leading i-by-i submatrices, i = 1..d (real)."""
    m = np.asarray(sigma, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    d = m.shape[0]
    return np.array([np.linalg.det(m[: i + 1, : i + 1]).real for i in range(d)])


def log_generalized_power(x: Sequence[float], sigma: np.ndarray) -> float:
    """ln of prod_i Lambda_i(sigma)^{delta_i(x)}, with 0*ln(0) = 0 and -inf
    when a zero minor carries positive exponent."""
    xs = check_sorted_cone(x)
    minors = principal_minors(sigma)
    if xs.size != minors.size:
        raise ValueError(f"need len(x) = {minors.size}, got {xs.size}")
    deltas = finite_diffs(xs)
    total = 0.0
    for delta, minor in zip(deltas, minors):
        if delta == 0.0:
            continue
        if minor <= 0.0:
            # rounding can push an exactly-singular minor slightly negative
            return -math.inf
        total += delta * math.log(minor)
    return total


def generalized_power(x: Sequence[float], sigma: np.ndarray) -> float:
    """prod_i Lambda_i(sigma)^{delta_i(x)}; 0^0 counts as 1."""
    log_gp = log_generalized_power(x, sigma)
    return 0.0 if log_gp == -math.inf else math.exp(log_gp)


@dataclass(frozen=True)
class DiagonalizedState:
    """A state with its descending spectrum and a deterministic diagonalizing
    unitary (rho = U diag(s) U†)."""

    rho: np.ndarray
    spectrum: np.ndarray
    unitary: np.ndarray

    def __post_init__(self):
        u = self.unitary
        d = u.shape[0]
        if np.max(np.abs(u @ u.conj().T - np.eye(d))) > UNITARY_TOL:
            raise ValueError("unitary fails the orthonormality tolerance")
        recon = u @ np.diag(self.spectrum) @ u.conj().T
        if np.max(np.abs(recon - self.rho)) > UNITARY_TOL:
            raise ValueError("unitary does not diagonalize the state")
        if np.any(np.diff(self.spectrum) > 1e-12):
            raise ValueError("spectrum must be descending")

    @classmethod
    def from_state(cls, rho: np.ndarray) -> "DiagonalizedState":
        """Eigendecompose with a deterministic column convention: descending
        eigenvalues; each eigenvector's first nonvanishing component made
        real positive; ties between equal eigenvalues broken by lexicographic
        comparison of the normalized vectors."""
        m = check_density(rho)
        vals, vecs = np.linalg.eigh(m)
        vals, vecs = vals[::-1], vecs[:, ::-1]
        cols = []
        for j in range(vals.size):
            v = vecs[:, j].copy()
            nz = np.flatnonzero(np.abs(v) > 1e-12)
            if nz.size:
                v = v * (abs(v[nz[0]]) / v[nz[0]])
            key = tuple(
                (round(float(c.real), 10), round(float(c.imag), 10)) for c in v
            )
            cols.append((j, key, v))
        cols.sort(key=lambda item: (-vals[item[0]], item[1]))
        u = np.column_stack([v for (_, _, v) in cols])
        s = np.maximum(np.array([vals[j] for (j, _, _) in cols]), 0.0)
        s = s / s.sum()
        return cls(m, s, u)


def classical_kl(p: Sequence[float], q: Sequence[float]) -> float:
    """Relative entropy sum p ln(p/q) in nats, extended-real."""
    pv = np.asarray(p, dtype=float)
    qv = np.asarray(q, dtype=float)
    total = 0.0
    for pi, qi in zip(pv, qv):
        if pi <= 0.0:
            continue
        if qi <= 0.0:
            return math.inf
        total += pi * math.log(pi / qi)
    return max(total, 0.0)


def keyl_divergence(ctx: DiagonalizedState, sigma: np.ndarray) -> float:
    """sum_i s_i ln s_i - delta_i(s) ln Lambda_i(U† sigma U), in [0, +inf]."""
    sig = check_hermitian(sigma, tol=1e-10)
    if sig.shape != ctx.rho.shape:
        raise ValueError("dimension mismatch between the two states")
    s = ctx.spectrum
    rotated = ctx.unitary.conj().T @ sig @ ctx.unitary
    log_gp = log_generalized_power(s, rotated)
    if log_gp == -math.inf:
        return math.inf
    entropy_part = float(sum(si * math.log(si) for si in s if si > 0.0))
    return max(entropy_part - log_gp, 0.0)


def mu_sequence(s: Sequence[float], k: int) -> Partition:
    """Integer shape with diffs ceil(diffs(k*s)); empty at k = 0."""
    return partition_from_spectrum(s, k)


def lambda_sequence(s: Sequence[float], n: int) -> Partition:
    """Partition of exactly n tracking n*s: the largest mu_sequence(s, k)
    fitting inside n, topped up on the first part."""
    if n < 1:
        raise ValueError("n must be positive")
    sv = check_spectrum(s)
    k = 0
    best = ()
    while True:
        nxt = mu_sequence(sv, k + 1)
        if sum(nxt) > n:
            break
        k += 1
        best = nxt
    if not best:
        return (n,)
    lam = (best[0] + n - sum(best),) + best[1:]
    assert sum(lam) == n and check_partition(lam)
    return lam


def discrimination_constant(s: Sequence[float]) -> float:
    """D(s) = s_1^{1 - d(d+1)/2} * prod_i (s_1...s_i)^{-ceil(delta_i(s))}."""
    sv = check_spectrum(s)
    if sv[0] <= 0.0:
        raise ValueError("the top spectral value must be positive")
    d = sv.size
    deltas = finite_diffs(sv)
    log_d = (1 - math.comb(d + 1, 2)) * math.log(sv[0])
    prefix = 0.0
    for i in range(d):
        if sv[i] <= 0.0:
            break  # remaining ceil(delta) exponents are all zero
        prefix += math.log(sv[i])
        log_d -= snap_ceil(deltas[i]) * prefix
    return math.exp(log_d)


def discrimination_ratio(ctx: DiagonalizedState, sigma: np.ndarray, n: int) -> float:
    """Power-function ratio of sigma to rho on the order-n tracking shape.

    Bounded above by discrimination_constant(s) * exp(-(n - d(d+1)/2 + 1) *
    keyl_divergence); exactly exp(-n K) along the subsequence where n*s is
    itself a partition.
    """
    sig = check_hermitian(sigma, tol=1e-10)
    s = ctx.spectrum
    d = s.size
    lam = lambda_sequence(s, n)
    lam_padded = np.array(lam + (0,) * (d - len(lam)), dtype=float)
    log_den = 0.0
    for part, si in zip(lam_padded, s):
        if part == 0.0:
            continue
        if si <= 0.0:
            raise ZeroDivisionError(
                "the tracking shape has more rows than the spectrum has "
                "nonzero entries, so the reference power vanishes"
            )
        log_den += part * math.log(si)
    rotated = ctx.unitary.conj().T @ sig @ ctx.unitary
    log_num = log_generalized_power(lam_padded, rotated)
    if log_num == -math.inf:
        return 0.0
    return math.exp(log_num - log_den)


def hwv_projector_oracle(
    lam: Sequence[int], d: int, unitary: np.ndarray, max_dense: int = MAX_DENSE_DEFAULT
) -> np.ndarray:
    """Brute-force twirled highest-weight projector (test oracle).

    Span of the permutation orbit of the column-antisymmetrized basis vector
    of shape lam, conjugated by unitary^⊗|lam|.  Rank dim_specht(lam);
    overlaps with rho^⊗|lam| reproduce dim_specht(lam) times the generalized
    power of the rotated state.
    """
    lam = check_partition(lam)
    if len(lam) > d:
        raise ValueError(f"shape has more than d = {d} rows: {lam}")
    k = sum(lam)
    if d**k > max_dense:
        raise GuardExceeded(f"dense dimension {d**k} exceeds max_dense = {max_dense}")
    u = np.asarray(unitary, dtype=complex)
    if np.max(np.abs(u @ u.conj().T - np.eye(d))) > UNITARY_TOL:
        raise ValueError("unitary fails the orthonormality tolerance")

    # wires filled column by column; column j of height h carries the wedge
    # e_1 ^ ... ^ e_h on its wires
    cols_heights = [sum(1 for p in lam if p > j) for j in range(lam[0])]
    wedges = []
    for h in cols_heights:
        wedge = np.zeros(d**h, dtype=complex)
        for perm in itertools.permutations(range(h)):
            parity = (-1) ** (h - len(Perm(perm).cycles()))
            idx = 0
            for w in range(h):
                idx = idx * d + perm[w]
            wedge[idx] += parity
        wedges.append(wedge)
    hwv = np.array([1.0 + 0j])
    for wedge in wedges:
        hwv = np.kron(hwv, wedge)
    hwv = hwv / np.linalg.norm(hwv)

    orbit = []
    for images in itertools.permutations(range(k)):
        t = permutation_matrix(Perm(images), [d] * k)
        orbit.append(t @ hwv)
    q = _gram_schmidt(np.column_stack(orbit))
    assert q.shape[1] == dim_specht(lam)
    proj = q @ q.conj().T
    u_pow = np.array([[1.0 + 0j]])
    for _ in range(k):
        u_pow = np.kron(u_pow, u)
    return u_pow @ proj @ u_pow.conj().T


def sampled_rate_upper_bound(
    p: ProductState, n_samples: int, seed: int = 0
) -> float:
    """Heuristic upper bound on the incompatibility rate: the smallest
    divergence from the assembled marginal to Haar-sampled compatible
    product marginals.  A sampling estimate, not a certificate."""
    if n_samples < 1:
        raise ValueError("need at least one sample")
    ctx = DiagonalizedState.from_state(assemble_product(p))
    rng = np.random.default_rng(seed)
    best = math.inf
    for _ in range(n_samples):
        psi = haar_sample_pure(p.scenario.joint, rng)
        compat = assemble_product(tau_map(psi, p.scenario))
        best = min(best, keyl_divergence(ctx, compat))
    return best
