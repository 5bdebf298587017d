"""Permutation-sweep kernels behind the symmetrizer contraction.

The sweep enumerates S_k in lexicographic order and, for each
permutation, walks its cycles once.  The walk yields, per subsystem
label, the closed-loop dimension factor (cycles lying entirely in that
label's traced wires) and the first-return residual permutation on the
kept wires.  Terms accumulate into a flat integer array indexed by a
mixed-radix Lehmer code over the per-label residuals; cycle-type
dependent weights (characters) are looked up through a prime-product
code of the cycle type, which never exceeds 2^k because the i-th prime
is at most 2^i.

Two interchangeable implementations:

* a numba-compiled int64 sweep (fast path), guarded against overflow by
  a conservative bound computed before dispatch; and
* a pure-Python big-integer sweep over ``itertools.permutations``, the
  exact semantic reference and the fallback when numba is disabled,
  unavailable, or the overflow guard trips.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from ._backend import active_backend, njit

# first primes, indexed 1-based by cycle length; p_i <= 2^i keeps the
# cycle-type code of any permutation in S_k at or below 2^k
_PRIMES = (
    0, 2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71,
)

MAX_ACCUMULATOR = 100_000_000  # flat table entries; ~0.8 GB of int64 at the limit


def cycle_type_code(cycle_type) -> int:
    """Prime-product code of a cycle type (a partition of k)."""
    return math.prod(_PRIMES[length] for length in cycle_type)


def weight_code_table(k: int, weights_by_type: dict[tuple[int, ...], int]) -> np.ndarray:
    """Dense int64 lookup from cycle-type code to weight; index range [0, 2^k]."""
    table = np.zeros(2**k + 1, dtype=np.int64)
    for ct, w in weights_by_type.items():
        table[cycle_type_code(ct)] = w
    return table


@njit(cache=True)
def _sweep_numba(k, kept_mask, kept_pos, kept_counts, dims, weights_by_code, primes, strides, fact, acc):
    L = dims.shape[0]
    perm = np.arange(k, dtype=np.int64)
    visited = np.zeros(k, dtype=np.bool_)
    first_kept = np.empty(L, dtype=np.int64)
    prev_kept = np.empty(L, dtype=np.int64)
    res = np.zeros((L, k), dtype=np.int64)
    lehm = np.empty(k, dtype=np.int64)
    while True:
        for w in range(k):
            visited[w] = False
        coeff = np.int64(1)
        code = np.int64(1)
        for w0 in range(k):
            if visited[w0]:
                continue
            for x in range(L):
                first_kept[x] = -1
                prev_kept[x] = -1
            cyclen = 0
            w = w0
            while True:
                visited[w] = True
                cyclen += 1
                for x in range(L):
                    if kept_mask[x, w]:
                        if first_kept[x] == -1:
                            first_kept[x] = w
                        else:
                            res[x, prev_kept[x]] = w
                        prev_kept[x] = w
                w = perm[w]
                if w == w0:
                    break
            code *= primes[cyclen]
            for x in range(L):
                if first_kept[x] == -1:
                    # the whole cycle is traced for this label: closed loop
                    coeff *= dims[x]
                else:
                    res[x, prev_kept[x]] = first_kept[x]
        wgt = weights_by_code[code]
        if wgt != 0:
            key = np.int64(0)
            for x in range(L):
                q = kept_counts[x]
                pos = 0
                for w in range(k):
                    if kept_mask[x, w]:
                        lehm[pos] = kept_pos[x, res[x, w]]
                        pos += 1
                idx = np.int64(0)
                for i in range(q):
                    smaller = np.int64(0)
                    for j in range(i + 1, q):
                        if lehm[j] < lehm[i]:
                            smaller += 1
                    idx += smaller * fact[q - 1 - i]
                key += idx * strides[x]
            acc[key] += coeff * wgt
        # lexicographic next permutation
        i = k - 2
        while i >= 0 and perm[i] > perm[i + 1]:
            i -= 1
        if i < 0:
            break
        j = k - 1
        while perm[j] < perm[i]:
            j -= 1
        t = perm[i]
        perm[i] = perm[j]
        perm[j] = t
        lo = i + 1
        hi = k - 1
        while lo < hi:
            t = perm[lo]
            perm[lo] = perm[hi]
            perm[hi] = t
            lo += 1
            hi -= 1


def _sweep_python(k, kept_lists, dims, weights_by_type):
    """Reference sweep with exact big integers; returns {residual key: coefficient}."""
    L = len(dims)
    kept_sets = [set(ks) for ks in kept_lists]
    kept_pos = [{w: i for i, w in enumerate(ks)} for ks in kept_lists]
    acc: dict[tuple, int] = {}
    for perm in itertools.permutations(range(k)):
        visited = [False] * k
        coeff = 1
        lengths = []
        res: list[dict[int, int]] = [dict() for _ in range(L)]
        for w0 in range(k):
            if visited[w0]:
                continue
            first = [-1] * L
            prev = [-1] * L
            cyclen = 0
            w = w0
            while True:
                visited[w] = True
                cyclen += 1
                for x in range(L):
                    if w in kept_sets[x]:
                        if first[x] < 0:
                            first[x] = w
                        else:
                            res[x][prev[x]] = w
                        prev[x] = w
                w = perm[w]
                if w == w0:
                    break
            lengths.append(cyclen)
            for x in range(L):
                if first[x] < 0:
                    coeff *= dims[x]
                else:
                    res[x][prev[x]] = first[x]
        wgt = weights_by_type[tuple(sorted(lengths, reverse=True))]
        if wgt == 0:
            continue
        key = tuple(
            tuple(kept_pos[x][res[x][w]] for w in kept_lists[x]) for x in range(L)
        )
        acc[key] = acc.get(key, 0) + coeff * wgt
    return {key: val for key, val in acc.items() if val != 0}


def _lehmer_decode(idx: int, q: int) -> tuple[int, ...]:
    remaining = list(range(q))
    out = []
    for i in range(q):
        f = math.factorial(q - 1 - i)
        c, idx = divmod(idx, f)
        out.append(remaining.pop(c))
    return tuple(out)


def _decode_accumulator(acc, kept_lists, strides):
    facts = [math.factorial(len(ks)) for ks in kept_lists]
    terms: dict[tuple, int] = {}
    for key in np.nonzero(acc)[0]:
        val = int(acc[key])
        decoded = []
        rem = int(key)
        for x in range(len(kept_lists)):
            idx = (rem // int(strides[x])) % facts[x]
            decoded.append(_lehmer_decode(idx, len(kept_lists[x])))
        terms[tuple(decoded)] = val
    return terms


def _numba_safe(k, dims, weights_by_type) -> bool:
    """Conservative int64-overflow guard for the accumulated coefficients.

    Per permutation the absolute term is at most d_J^{cycles}; summed over
    S_k that is the rising factorial d_J (d_J+1) ... (d_J+k-1), times the
    largest absolute weight.
    """
    d_j = math.prod(int(d) for d in dims)
    bound = math.prod(d_j + i for i in range(k))
    maxw = max((abs(w) for w in weights_by_type.values()), default=0)
    return bound * maxw < 2**62


def sweep(k: int, kept_lists, dims, weights_by_type) -> dict[tuple, int]:
    """Sum coeff(pi)*weight(cycle_type(pi)) over S_k, collected by residual key.

    kept_lists: per subsystem label, the sorted tuple of kept wire indices.
    dims: per-label dimensions.  weights_by_type: integer weight for every
    cycle type of S_k (missing types are an error in the numba path, so the
    caller supplies all of them).

    Returns {tuple of per-label residual permutations (as image tuples on
    local kept indices): integer coefficient}, zero coefficients dropped.
    The denominator k! is the caller's business.
    """
    if k < 1:
        raise ValueError("need at least one wire")
    dims = [int(d) for d in dims]
    kept_lists = [tuple(sorted(int(w) for w in ks)) for ks in kept_lists]
    for ks in kept_lists:
        if any(w < 0 or w >= k for w in ks):
            raise ValueError(f"kept wires out of range for k={k}: {ks}")
    use_numba = active_backend() == "numba" and _numba_safe(k, dims, weights_by_type)
    if not use_numba:
        return _sweep_python(k, kept_lists, dims, weights_by_type)

    L = len(dims)
    kept_mask = np.zeros((L, k), dtype=np.bool_)
    kept_pos = np.zeros((L, k), dtype=np.int64)
    kept_counts = np.zeros(L, dtype=np.int64)
    for x, ks in enumerate(kept_lists):
        kept_counts[x] = len(ks)
        for i, w in enumerate(ks):
            kept_mask[x, w] = True
            kept_pos[x, w] = i
    strides = np.zeros(L, dtype=np.int64)
    acc_size = 1
    for x, ks in enumerate(kept_lists):
        strides[x] = acc_size
        acc_size *= math.factorial(len(ks))
    if acc_size > MAX_ACCUMULATOR:
        raise ValueError(
            f"residual key space {acc_size} exceeds the accumulator bound "
            f"{MAX_ACCUMULATOR}"
        )
    acc = np.zeros(acc_size, dtype=np.int64)
    fact = np.array([math.factorial(i) for i in range(k + 1)], dtype=np.int64)
    primes = np.array(_PRIMES[: k + 1], dtype=np.int64)
    _sweep_numba(
        k,
        kept_mask,
        kept_pos,
        kept_counts,
        np.array(dims, dtype=np.int64),
        weight_code_table(k, weights_by_type),
        primes,
        strides,
        fact,
        acc,
    )
    return _decode_accumulator(acc, kept_lists, strides)


@njit(cache=True)
def _scatter_terms_numba(out, rows_blk, coeffs_blk):
    total, nblk = rows_blk.shape
    for t in range(nblk):
        c = coeffs_blk[t]
        for r in range(total):
            out[rows_blk[r, t], r] += c


def scatter_terms(out: np.ndarray, rows_blk: np.ndarray, coeffs_blk: np.ndarray) -> None:
    """out[rows_blk[r, t], r] += coeffs_blk[t] for every column t.

    Each rows_blk column is a permutation of the row indices, so the adds
    never collide within a column.
    """
    if active_backend() == "numba":
        _scatter_terms_numba(out, rows_blk, coeffs_blk)
        return
    cols = np.arange(out.shape[1])
    for t in range(rows_blk.shape[1]):
        out[rows_blk[:, t], cols] += coeffs_blk[t]
