"""Wire-diagram contraction of permutation operators.

A permutation pi acting on k tensor wires, partially traced over a
subset of the wires, contracts to d^(number of closed loops) times the
first-return permutation on the kept wires.  Applied per subsystem
label across the n*m wires of a marginal scenario, and summed over all
of S_{nm}, this produces the symmetric-subspace witness operator
without ever touching the joint Hilbert space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np

from . import _kernels
from .combinatorics import enumerate_partitions
from .scenario import MarginalScenario

MAX_NM_DEFAULT = 8
MAX_DENSE_DEFAULT = 4096


class GuardExceeded(ValueError):
    """A size guard refused the computation; the message names the bound."""


@dataclass(frozen=True)
class Perm:
    """A permutation of {0..k-1}; images[q] is where wire q's content moves."""

    images: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "images", tuple(int(i) for i in self.images))
        if sorted(self.images) != list(range(len(self.images))):
            raise ValueError(f"not a permutation of 0..{len(self.images)-1}: {self.images}")

    @classmethod
    def identity(cls, k: int) -> "Perm":
        return cls(tuple(range(k)))

    @property
    def size(self) -> int:
        return len(self.images)

    def __call__(self, q: int) -> int:
        return self.images[q]

    def compose(self, other: "Perm") -> "Perm":
        """self after other: q -> self(other(q))."""
        return Perm(tuple(self.images[j] for j in other.images))

    def inverse(self) -> "Perm":
        inv = [0] * self.size
        for q, j in enumerate(self.images):
            inv[j] = q
        return Perm(tuple(inv))

    def cycles(self) -> list[tuple[int, ...]]:
        seen = [False] * self.size
        out = []
        for q0 in range(self.size):
            if seen[q0]:
                continue
            cyc = []
            q = q0
            while not seen[q]:
                seen[q] = True
                cyc.append(q)
                q = self.images[q]
            out.append(tuple(cyc))
        return out

    def cycle_type(self) -> tuple[int, ...]:
        return tuple(sorted((len(c) for c in self.cycles()), reverse=True))


def permutation_matrix(perm: Perm, dims: Sequence[int]) -> np.ndarray:
    """Dense integer matrix of the wire permutation on ⊗_q C^{dims[q]}.

    Convention: the operator sends wire q's index to wire perm(q), so the
    matrix element between row multi-index i and column multi-index j is
    prod_q delta(i[perm(q)], j[q]).
    """
    dims = [int(d) for d in dims]
    if len(dims) != perm.size:
        raise ValueError("one dimension per wire required")
    total = math.prod(dims)
    pv = np.ones(len(dims), dtype=np.int64)
    for q in range(len(dims) - 2, -1, -1):
        pv[q] = pv[q + 1] * dims[q + 1]
    digits = np.empty((total, len(dims)), dtype=np.int64)
    idx = np.arange(total, dtype=np.int64)
    for q in range(len(dims)):
        digits[:, q] = idx // pv[q] % dims[q]
    pv_perm = np.array([pv[perm(q)] for q in range(perm.size)], dtype=np.int64)
    rows = digits @ pv_perm
    mat = np.zeros((total, total), dtype=np.int64)
    mat[rows, np.arange(total)] = 1
    return mat


def trace_permutation_wires(
    perm: Perm, traced: set[int] | frozenset[int], d: int
) -> tuple[int, Perm]:
    """Contract a single-label wire permutation over the traced wires.

    Returns (d^c, residual) where c counts cycles of perm lying entirely
    inside traced, and residual is the first-return map on the kept wires
    (in their sorted order): follow perm forward from a kept wire until the
    walk lands on a kept wire again.
    """
    traced = set(traced)
    if not traced <= set(range(perm.size)):
        raise ValueError(f"traced wires out of range: {traced}")
    kept = [q for q in range(perm.size) if q not in traced]
    kept_rank = {q: i for i, q in enumerate(kept)}
    coeff = 1
    images = []
    for q in kept:
        w = perm(q)
        while w in traced:
            w = perm(w)
        images.append(kept_rank[w])
    for cyc in perm.cycles():
        if all(w in traced for w in cyc):
            coeff *= d
    return coeff, Perm(tuple(images))


def kept_wires(scenario: MarginalScenario, n: int) -> dict[str, tuple[int, ...]]:
    """Per subsystem label, the wires (t = b*m + i) whose slot keeps the label."""
    m = scenario.m
    out: dict[str, tuple[int, ...]] = {}
    for label in scenario.joint.labels:
        ws = [
            b * m + i
            for b in range(n)
            for i, ctx in enumerate(scenario.contexts)
            if label in ctx
        ]
        out[label] = tuple(sorted(ws))
    return out


def contract_scenario_permutation(
    scenario: MarginalScenario, n: int, perm: Perm
) -> tuple[int, dict[str, Perm]]:
    """Contract one S_{nm} element against the scenario's traced wires.

    For each label the kept wires are those whose slot context contains the
    label; the total coefficient is the product of the per-label loop
    factors, and the per-label residuals are returned unmaterialized.
    """
    k = n * scenario.m
    if perm.size != k:
        raise ValueError(f"permutation must act on {k} wires, got {perm.size}")
    kw = kept_wires(scenario, n)
    coeff = 1
    residuals: dict[str, Perm] = {}
    for label in scenario.joint.labels:
        traced = set(range(k)) - set(kw[label])
        c, res = trace_permutation_wires(perm, traced, scenario.joint.dim_of(label))
        coeff *= c
        residuals[label] = res
    return coeff, residuals


@dataclass(frozen=True)
class PermTermSum:
    """Collected contraction terms: per-label residuals -> exact numerator.

    Represents (1/denominator) * sum over keys of
    numerator * ⊗_labels T_label(residual).
    """

    scenario: MarginalScenario
    n: int
    denominator: int
    terms: Mapping[tuple[tuple[int, ...], ...], int]

    def __post_init__(self):
        if any(v == 0 for v in self.terms.values()):
            raise ValueError("zero coefficients must be dropped before construction")

    @cached_property
    def kept(self) -> dict[str, tuple[int, ...]]:
        return kept_wires(self.scenario, self.n)

    def residuals_of(self, key) -> dict[str, Perm]:
        return {
            label: Perm(images)
            for label, images in zip(self.scenario.joint.labels, key)
        }

    def exact_trace(self) -> Fraction:
        """Rational trace of the represented operator.

        Each term's operator has trace prod_X d_X^(cycles of the residual),
        so the sum stays in exact integer arithmetic; the float materialized
        array rounds entry by entry and its trace can drift off the exact
        value."""
        joint = self.scenario.joint
        total = 0
        for key, numerator in self.terms.items():
            weight = 1
            for d, images in zip(joint.dims, key):
                weight *= d ** len(Perm(images).cycles())
            total += numerator * weight
        return Fraction(total, self.denominator)


def symmetrizer_contraction(
    scenario: MarginalScenario,
    n: int,
    weights_by_type: Mapping[tuple[int, ...], int] | None = None,
    max_nm: int = MAX_NM_DEFAULT,
) -> PermTermSum:
    """Contract the nm-fold symmetrizer (optionally character-weighted).

    With no weights every permutation counts once, giving the projector
    average; a weight table (cycle type -> integer) folds in central
    character sums.  Guard: nm <= max_nm.
    """
    if n < 1:
        raise ValueError("n must be positive")
    k = n * scenario.m
    if k > max_nm:
        raise GuardExceeded(
            f"nm = {k} exceeds the permutation-sweep bound max_nm = {max_nm}"
        )
    if weights_by_type is None:
        weights_by_type = {ct: 1 for ct in enumerate_partitions(k, k)}
    labels = scenario.joint.labels
    kw = kept_wires(scenario, n)
    terms = _kernels.sweep(
        k,
        [kw[l] for l in labels],
        [scenario.joint.dim_of(l) for l in labels],
        dict(weights_by_type),
    )
    return PermTermSum(scenario, n, math.factorial(k), terms)


def _positions(scenario: MarginalScenario, n: int):
    """Tensor positions of H_M^⊗n in row-major order: (block, slot, label)."""
    m = scenario.m
    pos = []
    for b in range(n):
        for i, ctx in enumerate(scenario.contexts):
            for label in ctx:
                pos.append((b * m + i, label))
    dims = np.array(
        [scenario.joint.dim_of(label) for (_, label) in pos], dtype=np.int64
    )
    return pos, dims


def materialize(tsum: PermTermSum, max_dense: int = MAX_DENSE_DEFAULT) -> np.ndarray:
    """Dense matrix of the collected sum on H_M^⊗n (real symmetric float64).

    Numerators stay integers until the final division by the denominator,
    so permutation-sum identities hold exactly.  Guard: d_M^n <= max_dense.
    """
    scenario, n = tsum.scenario, tsum.n
    total = scenario.marginal_dim**n
    if total > max_dense:
        raise GuardExceeded(
            f"dense dimension {total} exceeds the bound max_dense = {max_dense}"
        )
    pos, pdims = _positions(scenario, n)
    npos = len(pos)
    pv = np.ones(npos, dtype=np.int64)
    for p in range(npos - 2, -1, -1):
        pv[p] = pv[p + 1] * pdims[p + 1]
    pos_index = {pl: p for p, pl in enumerate(pos)}
    kw = tsum.kept
    local_rank = {
        label: {t: q for q, t in enumerate(ws)} for label, ws in kw.items()
    }

    digits = np.empty((total, npos), dtype=np.int64)
    idx = np.arange(total, dtype=np.int64)
    for p in range(npos):
        digits[:, p] = idx // pv[p] % pdims[p]

    labels = scenario.joint.labels
    keys = list(tsum.terms.keys())
    coeffs = np.array([float(tsum.terms[key]) for key in keys])
    assert np.all(np.abs(coeffs) < 2**53), "numerators exceed exact float range"

    # one column of pvG per term: pvG[p] = pv[position receiving p's index]
    pvg = np.empty((npos, len(keys)), dtype=np.int64)
    for col, key in enumerate(keys):
        for p, (t, label) in enumerate(pos):
            res = key[labels.index(label)]
            q = local_rank[label][t]
            t_img = kw[label][res[q]]
            pvg[p, col] = pv[pos_index[(t_img, label)]]

    out = np.zeros((total, total))
    digits_f = digits.astype(float)
    # chunk the term axis so the (total x block) row table stays small
    block = max(1, 8_000_000 // total)
    for start in range(0, len(keys), block):
        sub = pvg[:, start : start + block].astype(float)
        rows_blk = digits_f @ sub
        assert np.all(rows_blk < 2**53)
        _kernels.scatter_terms(out, rows_blk.astype(np.int64), coeffs[start : start + block])
    out /= float(tsum.denominator)
    return out
