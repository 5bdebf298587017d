"""Two disjoint marginals: spectrum test, optimal rate, and the
Littlewood-Richardson inequality.

For a pair of density operators on separate subsystems, a joint pure
state with those marginals exists exactly when their nonzero spectra
agree.  Quantitatively, the incompatibility rate is the symmetrized
relative entropy to the best common spectrum, and every pair of Schur
polynomials of the two spectra is bounded by an explicit sum of
representation dimensions.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .combinatorics import (
    Partition,
    check_partition,
    check_spectrum,
    dim_specht,
    dim_weyl,
    enumerate_partitions,
    lr_coefficient,
    schur_polynomial,
)
from .keyl import classical_kl
from .scenario import check_density

SPECTRUM_MATCH_TOL = 1e-9


def descending_spectrum(rho: np.ndarray) -> np.ndarray:
    return np.linalg.eigvalsh(check_density(rho))[::-1].copy()


def _zero_pad(values: np.ndarray, length: int) -> np.ndarray:
    out = np.zeros(length)
    out[: values.size] = values
    return out


def bipartite_compatible(
    rho_a: np.ndarray, rho_b: np.ndarray, tol: float = SPECTRUM_MATCH_TOL
) -> bool:
    """True exactly when the zero-padded descending spectra agree within tol."""
    sa = descending_spectrum(rho_a)
    sb = descending_spectrum(rho_b)
    width = max(sa.size, sb.size)
    return bool(np.max(np.abs(_zero_pad(sa, width) - _zero_pad(sb, width))) <= tol)


def bipartite_rate(
    s_a: Sequence[float], s_b: Sequence[float], common_len: int
) -> float:
    """inf over length-common_len distributions r of KL(s_a||r) + KL(s_b||r).

    The stationarity condition gives the minimizer r* = (s_a + s_b)/2 on the
    first common_len coordinates; any spectral mass beyond them makes the
    rate infinite.  Zero exactly when the two spectra coincide.
    """
    sa = check_spectrum(s_a)
    sb = check_spectrum(s_b)
    if common_len != min(sa.size, sb.size):
        raise ValueError(
            f"common_len must be min(len(s_a), len(s_b)) = {min(sa.size, sb.size)}"
        )
    if sa[common_len:].sum() > 0.0 or sb[common_len:].sum() > 0.0:
        return math.inf
    sa = sa[:common_len]
    sb = sb[:common_len]
    r_star = (sa + sb) / 2
    return classical_kl(sa, r_star) + classical_kl(sb, r_star)


def bipartite_inequality_check(
    rho_a: np.ndarray,
    rho_b: np.ndarray,
    n: int,
    alpha: Sequence[int],
    beta: Sequence[int],
) -> tuple[float, float, bool]:
    """Compare s_alpha(spec A) * s_beta(spec B) against the dimension sum
    over partitions of 2n with at most min(a,b) rows.

    Returns (lhs, rhs, holds); the inequality is guaranteed for compatible
    pairs and its failure certifies incompatibility.
    """
    alpha = check_partition(alpha)
    beta = check_partition(beta)
    if sum(alpha) != n or sum(beta) != n:
        raise ValueError(f"alpha and beta must be partitions of n = {n}")
    sa = descending_spectrum(rho_a)
    sb = descending_spectrum(rho_b)
    a, b = sa.size, sb.size
    if len(alpha) > a or len(beta) > b:
        raise ValueError("shape has more rows than the matching state has levels")
    lhs = schur_polynomial(alpha, sa) * schur_polynomial(beta, sb)
    ell = min(a, b)
    rhs = 0.0
    for lam in enumerate_partitions(2 * n, ell):
        c = lr_coefficient(alpha, beta, lam)
        if c:
            rhs += c * dim_weyl(lam, a) * dim_weyl(lam, b) / dim_specht(lam)
    holds = lhs <= rhs + 1e-12
    return float(lhs), float(rhs), holds
