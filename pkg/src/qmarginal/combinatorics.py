"""Partitions, spectra, symmetric-group characters, and Schur/LR combinatorics.

Partitions are plain tuples of weakly decreasing positive integers,
stored unpadded; zero-padding to a contextual length happens at call
sites.  Spectra are 1-d float arrays, sorted descending, summing to 1.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import cache, lru_cache
from typing import Iterable, Sequence

import numpy as np

Partition = tuple[int, ...]

# floats within this distance of an integer snap to it before any ceiling,
# so rational spectra given in floating point produce exact integer shapes
CEIL_SNAP = 1e-9

SPECTRUM_SUM_TOL = 1e-12


def is_partition(parts: Sequence[int]) -> bool:
    return all(
        isinstance(p, (int, np.integer)) and p >= 1 for p in parts
    ) and all(parts[i] >= parts[i + 1] for i in range(len(parts) - 1))


def check_partition(parts: Sequence[int]) -> Partition:
    lam = tuple(int(p) for p in parts)
    if not is_partition(lam):
        raise ValueError(f"not a partition (weakly decreasing positive parts): {parts}")
    return lam


def check_spectrum(values: Sequence[float]) -> np.ndarray:
    s = np.asarray(values, dtype=float)
    if s.ndim != 1 or s.size == 0:
        raise ValueError("spectrum must be a nonempty 1-d sequence")
    if np.any(s < -SPECTRUM_SUM_TOL):
        raise ValueError(f"spectrum entries must be nonnegative: {values}")
    if np.any(np.diff(s) > SPECTRUM_SUM_TOL):
        raise ValueError(f"spectrum must be sorted descending: {values}")
    if abs(float(s.sum()) - 1.0) > SPECTRUM_SUM_TOL:
        raise ValueError(f"spectrum must sum to 1 within {SPECTRUM_SUM_TOL}: sum={s.sum()}")
    return s


def check_sorted_cone(values: Sequence[float]) -> np.ndarray:
    x = np.asarray(values, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise ValueError("expected a nonempty 1-d sequence")
    if np.any(x < -SPECTRUM_SUM_TOL):
        raise ValueError(f"entries must be nonnegative: {values}")
    if np.any(np.diff(x) > SPECTRUM_SUM_TOL):
        raise ValueError(f"entries must be sorted descending: {values}")
    return x


def finite_diffs(x: Sequence[float]) -> np.ndarray:
    """Successive differences (x_1-x_2, ..., x_{d-1}-x_d, x_d) of a sorted cone.

    Inverse of :func:`suffix_sums`.  Rejects input that is not weakly
    decreasing and nonnegative.
    """
    xs = check_sorted_cone(x)
    out = np.empty_like(xs)
    out[:-1] = xs[:-1] - xs[1:]
    out[-1] = xs[-1]
    # rounding can leave -1e-17 style noise
    return np.maximum(out, 0.0)


def suffix_sums(y: Sequence[float]) -> np.ndarray:
    """Suffix partial sums; inverse of :func:`finite_diffs`.  Rejects negatives."""
    ys = np.asarray(y, dtype=float)
    if np.any(ys < 0):
        raise ValueError(f"entries must be nonnegative: {y}")
    return np.cumsum(ys[::-1])[::-1].copy()


def snap_ceil(v: float) -> int:
    r = round(v)
    if abs(v - r) <= CEIL_SNAP:
        return int(r)
    return int(math.ceil(v))


def partition_from_spectrum(s: Sequence[float], n: int) -> Partition:
    """Integer shape approximating n*s, via ceilings of successive differences.

    The returned partition lam satisfies, with d = len(s):
    diff_i(lam) = ceil(diff_i(n*s)); n <= |lam| <= n + C(d+1,2) - 1;
    0 <= lam_i - n*s_i < d - i + 1 (1-indexed); equal spectrum entries give
    equal parts.  n = 0 is allowed and gives the empty partition when all
    ceilings vanish.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    sv = check_spectrum(s)
    d = sv.size
    diffs = finite_diffs(n * sv)
    ceiled = [snap_ceil(v) for v in diffs]
    padded = suffix_sums(ceiled)
    lam = tuple(int(p) for p in padded if p > 0)
    # cheap postcondition asserts; these are the defining guarantees
    size = sum(lam)
    assert n <= size <= n + math.comb(d + 1, 2) - 1 or n == 0
    full = lam + (0,) * (d - len(lam))
    for i in range(d):
        gap = full[i] - n * sv[i]
        assert -1e-9 <= gap < d - i + 1e-9
        if i + 1 < d and sv[i] == sv[i + 1]:
            assert full[i] == full[i + 1]
    return lam


def enumerate_partitions(n: int, d: int) -> list[Partition]:
    """All partitions of n with at most d parts, lexicographically descending."""
    if n < 0 or d < 1:
        raise ValueError("n must be nonnegative and d positive")
    if n == 0:
        return [()]
    out: list[Partition] = []

    def rec(remaining: int, maxpart: int, prefix: list[int]):
        if remaining == 0:
            out.append(tuple(prefix))
            return
        if len(prefix) == d:
            return
        for p in range(min(maxpart, remaining), 0, -1):
            prefix.append(p)
            rec(remaining - p, p, prefix)
            prefix.pop()

    rec(n, n, [])
    return out


def _hooks(lam: Partition) -> list[int]:
    cols = _conjugate(lam)
    hooks = []
    for i, row in enumerate(lam):
        for j in range(row):
            hooks.append(row - j + cols[j] - i - 1)
    return hooks


def _conjugate(lam: Partition) -> Partition:
    if not lam:
        return ()
    return tuple(sum(1 for p in lam if p > j) for j in range(lam[0]))


def dim_specht(lam: Sequence[int]) -> int:
    """Number of standard Young tableaux of shape lam (hook length formula)."""
    lam = check_partition(lam) if lam else ()
    if not lam:
        return 1
    k = sum(lam)
    num = math.factorial(k)
    den = math.prod(_hooks(lam))
    assert num % den == 0
    return num // den


def dim_weyl(lam: Sequence[int], d: int) -> int:
    """Dimension of the GL(d) irreducible of highest weight lam; 0 if too tall.

    Hook content formula: prod over cells (d + j - i) / hook(i, j).
    """
    lam = check_partition(lam) if lam else ()
    if d < 1:
        raise ValueError("d must be positive")
    if len(lam) > d:
        return 0
    if not lam:
        return 1
    num = 1
    for i, row in enumerate(lam):
        for j in range(row):
            num *= d + j - i
    den = math.prod(_hooks(lam))
    assert num % den == 0
    return num // den


@cache
def _mn_character(lam: Partition, rho: Partition) -> int:
    # Murnaghan-Nakayama on beta-numbers: remove one border strip of
    # length rho[0] and recurse on the rest of the cycle type.
    if not rho:
        return 1 if not lam else 0
    length = rho[0]
    rest = rho[1:]
    ell = len(lam)
    betas = [lam[i] + (ell - 1 - i) for i in range(ell)]  # strictly decreasing
    bset = set(betas)
    total = 0
    for i, b in enumerate(betas):
        nb = b - length
        if nb < 0 or nb in bset:
            continue
        # height = number of betas strictly between nb and b
        height = sum(1 for c in betas if nb < c < b)
        newbetas = sorted((bset - {b}) | {nb}, reverse=True)
        newlam = tuple(
            nb2 - (ell - 1 - j) for j, nb2 in enumerate(newbetas)
        )
        newlam = tuple(p for p in newlam if p > 0)
        total += (-1) ** height * _mn_character(newlam, rest)
    return total


def sn_character(lam: Sequence[int], cycle_type: Sequence[int]) -> int:
    """Irreducible S_k character chi^lam on the class of the given cycle type."""
    lam = check_partition(lam) if lam else ()
    rho = check_partition(cycle_type) if cycle_type else ()
    if sum(lam) != sum(rho):
        raise ValueError(f"|lam|={sum(lam)} does not match |cycle_type|={sum(rho)}")
    return _mn_character(lam, rho)


def conjugacy_class_size(cycle_type: Sequence[int]) -> int:
    rho = check_partition(cycle_type) if cycle_type else ()
    k = sum(rho)
    z = 1
    counts: dict[int, int] = {}
    for l in rho:
        counts[l] = counts.get(l, 0) + 1
    for l, m in counts.items():
        z *= l**m * math.factorial(m)
    return math.factorial(k) // z


def complete_homogeneous(x: np.ndarray, nmax: int) -> np.ndarray:
    """h_0..h_nmax of the variables x, by the one-variable-at-a-time recurrence."""
    h = np.zeros(nmax + 1, dtype=float)
    h[0] = 1.0
    for xj in x:
        for k in range(1, nmax + 1):
            h[k] += xj * h[k - 1]
    return h


def schur_polynomial(lam: Sequence[int], x: Sequence[float]) -> float:
    """Schur polynomial s_lam(x) via the Jacobi-Trudi determinant.

    det(h_{lam_i - i + j}) is stable for nonnegative variables, unlike the
    bialternant quotient which degenerates at repeated entries; this is the
    documented route.  Requires len(x) >= len(lam).
    """
    lam = check_partition(lam) if lam else ()
    xv = np.asarray(x, dtype=float)
    if np.any(xv < 0):
        raise ValueError("variables must be nonnegative")
    if not lam:
        return 1.0
    ell = len(lam)
    if xv.size < ell:
        raise ValueError(f"need at least {ell} variables, got {xv.size}")
    h = complete_homogeneous(xv, lam[0] + ell)
    mat = np.zeros((ell, ell))
    for i in range(ell):
        for j in range(ell):
            idx = lam[i] - (i + 1) + (j + 1)
            if idx >= 0:
                mat[i, j] = h[idx]
    return float(np.linalg.det(mat))


def _contains(lam: Partition, mu: Partition) -> bool:
    if len(mu) > len(lam):
        return False
    return all(mu[i] <= lam[i] for i in range(len(mu)))


def lr_coefficient(alpha: Sequence[int], beta: Sequence[int], lam: Sequence[int]) -> int:
    """Littlewood-Richardson coefficient c^lam_{alpha,beta}.

    Counts LR skew tableaux of shape lam/alpha with content beta: semistandard
    fillings whose reverse reading word is a lattice word.  Returns 0 when the
    sizes do not match or alpha is not contained in lam.
    """
    alpha = check_partition(alpha) if alpha else ()
    beta = check_partition(beta) if beta else ()
    lam = check_partition(lam) if lam else ()
    if sum(alpha) + sum(beta) != sum(lam) or not _contains(lam, alpha):
        return 0
    if not beta:
        return 1 if lam == alpha else 0

    nrows = len(lam)
    apad = alpha + (0,) * (nrows - len(alpha))
    # cells in reading order: rows top to bottom, right to left within a row
    cells = [
        (r, c) for r in range(nrows) for c in range(lam[r] - 1, apad[r] - 1, -1)
    ]
    maxval = len(beta)
    fill = {}
    counts = [0] * (maxval + 1)
    total = 0

    def rec(pos: int):
        nonlocal total
        if pos == len(cells):
            total += 1
            return
        r, c = cells[pos]
        for v in range(1, maxval + 1):
            if counts[v] >= beta[v - 1]:
                continue
            # lattice: after placing, every prefix has counts[v] <= counts[v-1]
            if v > 1 and counts[v] + 1 > counts[v - 1]:
                continue
            # row weakly increases left to right
            right = fill.get((r, c + 1))
            if right is not None and v > right:
                continue
            # column strictly increases downward
            above = fill.get((r - 1, c))
            if r > 0 and c >= apad[r - 1]:
                if above is None or v <= above:
                    continue
            fill[(r, c)] = v
            counts[v] += 1
            rec(pos + 1)
            counts[v] -= 1
            del fill[(r, c)]

    rec(0)
    return total


@lru_cache(maxsize=None)
def character_weight_table(k: int, v: int) -> dict[Partition, int]:
    """Per-cycle-type weights sum_{lam in Y^v_k} dim_specht(lam) * chi^lam."""
    lams = [l for l in enumerate_partitions(k, min(v, k))]
    dims = {l: dim_specht(l) for l in lams}
    table: dict[Partition, int] = {}
    for rho in enumerate_partitions(k, k):
        table[rho] = sum(dims[l] * sn_character(l, rho) for l in lams)
    return table
