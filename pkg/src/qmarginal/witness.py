"""Compatibility witnesses: build W_n, check product marginals against it,
scan orders, test the orthogonal-count inequality, and Monte-Carlo-validate
the symmetric-subspace integral identity.

A violated report is a sound incompatibility certificate; a non-violated
report is always "inconclusive at this order", never a compatibility claim.

Large checks (dense dimension above 1024) avoid the full eigensolve: with
P = V V† the candidate operator and M = W + eps*I, the smallest eigenvalue
of W - P is below -eps exactly when lambda_max(V† M^{-1} V) exceeds 1, and
any violating direction lies in span(M^{-1} V).  So the check restricts
W - P to that span (orthonormalized), which both keeps the report's
eigenvalue an upper bound of the true one and is guaranteed to expose a
violation whenever one exists at tolerance eps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping

import numpy as np
import scipy.linalg
import scipy.sparse.linalg

from .combinatorics import character_weight_table
from .diagrams import (
    MAX_DENSE_DEFAULT,
    MAX_NM_DEFAULT,
    materialize,
    symmetrizer_contraction,
)
from .operators import min_eigenvalue
from .scenario import (
    MarginalScenario,
    ProductState,
    assemble_product,
    haar_sample_pure,
    tau_map,
)

VIOLATION_TOL_DEFAULT = 1e-9
DENSE_EIG_BOUND = 1024
LOWRANK_MAX_COLUMNS = 400
FACTOR_EIG_CUTOFF = 1e-13


@dataclass(frozen=True)
class WitnessReport:
    """Outcome of one inequality check at a fixed order.

    min_eig is the smallest eigenvalue found for W - candidate.  The dense
    solver returns the exact minimum; the structured solvers return an
    upper bound that drops below -tol*scale exactly when the true minimum
    does, so `violated` is sound on every path.  A violation always comes
    with a unit `certificate` vector achieving min_eig as its Rayleigh
    quotient.
    """

    order: int
    min_eig: float
    violated: bool
    witness_trace: float
    scale: float
    tol: float
    certificate: np.ndarray | None

    def __post_init__(self):
        if self.violated != (self.min_eig < -self.tol * self.scale):
            raise ValueError("violation flag inconsistent with the eigenvalue")
        if self.violated != (self.certificate is not None):
            raise ValueError("certificate must be present exactly when violated")

    @property
    def verdict(self) -> str:
        return "violated" if self.violated else "inconclusive"


def build_witness(
    scenario: MarginalScenario,
    n: int,
    max_nm: int = MAX_NM_DEFAULT,
    max_dense: int = MAX_DENSE_DEFAULT,
    weights_by_type: Mapping[tuple[int, ...], int] | None = None,
) -> np.ndarray:
    """Dense witness operator: the n-fold contraction of the nm-wire
    symmetrizer (optionally character-weighted) onto the marginal space."""
    tsum = symmetrizer_contraction(scenario, n, weights_by_type, max_nm=max_nm)
    return materialize(tsum, max_dense=max_dense)


class _WitnessContext:
    """A built witness plus lazily-derived solver state, shared across checks."""

    def __init__(self, w: np.ndarray, tol: float, exact_trace: float | None = None):
        self.w = w
        self.trace = float(np.trace(w).real) if exact_trace is None else exact_trace
        dim = w.shape[0]
        if dim <= 256:
            self.norm = float(np.linalg.eigvalsh(w)[-1])
        else:
            # W is PSD, so the largest algebraic eigenvalue is the norm
            vals = scipy.sparse.linalg.eigsh(w, k=1, which="LA", return_eigenvectors=False)
            self.norm = float(vals[0])
        self.scale = max(1.0, self.norm)
        self.eps = tol * self.scale
        self._cho = None

    @property
    def cho(self):
        if self._cho is None:
            shifted = self.w + self.eps * np.eye(self.w.shape[0])
            self._cho = scipy.linalg.cho_factor(shifted, lower=True)
        return self._cho


@lru_cache(maxsize=4)
def _context(
    scenario: MarginalScenario,
    n: int,
    tol: float,
    max_nm: int,
    max_dense: int,
    ortho_v: int | None,
) -> _WitnessContext:
    weights = None
    if ortho_v is not None:
        weights = character_weight_table(n * scenario.m, ortho_v)
    tsum = symmetrizer_contraction(scenario, n, weights, max_nm=max_nm)
    w = materialize(tsum, max_dense=max_dense)
    return _WitnessContext(w, tol, exact_trace=float(tsum.exact_trace()))


def _low_rank_factor(p: ProductState, n: int, scale: float = 1.0) -> np.ndarray:
    """V with V V† = scale * (rho_{S_1} ⊗ ... ⊗ rho_{S_m})^⊗n.

    Factor eigenvalues below FACTOR_EIG_CUTOFF are dropped; the resulting
    operator perturbation is far below every violation tolerance in use.
    """
    v_m = np.array([[1.0 + 0j]])
    for f in p.factors:
        vals, vecs = np.linalg.eigh(f)
        keep = vals > FACTOR_EIG_CUTOFF
        v_m = np.kron(v_m, vecs[:, keep] * np.sqrt(vals[keep]))
    v = v_m
    for _ in range(n - 1):
        v = np.kron(v, v_m)
    return v * math.sqrt(scale)


def _apply_kron_power(u: np.ndarray, n: int, y: np.ndarray) -> np.ndarray:
    """(u^{⊗n}) y for a square u and a vector y of length u.shape[0]**n."""
    d = u.shape[0]
    t = y.reshape((d,) * n)
    for ax in range(n):
        t = np.moveaxis(np.tensordot(u, t, axes=(1, ax)), 0, ax)
    return t.ravel()


def _report_from_product_diagonal(
    ctx: _WitnessContext, p: ProductState, order: int, tol: float, lhs_scale: float
) -> WitnessReport:
    """Check for a disjoint all-singles scenario with full-rank factors.

    W commutes with (u_1 ⊗ ... ⊗ u_m)^⊗n for one unitary per label, so
    rotating every factor to its eigenbasis leaves W fixed and turns the
    candidate into the real diagonal Λ.  A successful real Cholesky of
    W - Λ + eps*I certifies min_eig >= -eps; in that case min_eig is an
    inverse-iteration estimate (an upper bound on the true minimum).  On
    failure the exact dense path runs on the real matrix W - Λ and the
    eigenvector is rotated back to the original basis.
    """
    spectra, rotations = [], []
    for f in p.factors:
        vals, vecs = np.linalg.eigh(f)
        spectra.append(vals)
        rotations.append(vecs)
    lam_m = np.array([1.0])
    for vals in spectra:
        lam_m = np.kron(lam_m, vals)
    lam = np.array([lhs_scale])
    for _ in range(order):
        lam = np.kron(lam, lam_m)
    shifted = ctx.w - np.diag(lam)
    a = shifted + ctx.eps * np.eye(lam.size)
    try:
        cho = scipy.linalg.cho_factor(a, lower=True, check_finite=False)
    except np.linalg.LinAlgError:
        val, vec_diag = min_eigenvalue(shifted)
        violated = val < -tol * ctx.scale
        certificate = None
        if violated:
            u_m = np.array([[1.0 + 0j]])
            for vecs in rotations:
                u_m = np.kron(u_m, vecs)
            certificate = _apply_kron_power(u_m, order, vec_diag.astype(complex))
            certificate = certificate / np.linalg.norm(certificate)
        return WitnessReport(
            order=order,
            min_eig=val,
            violated=violated,
            witness_trace=ctx.trace,
            scale=ctx.scale,
            tol=tol,
            certificate=certificate,
        )
    # PSD certified; estimate the smallest eigenvalue by inverse iteration
    y = np.full(lam.size, 1.0 / math.sqrt(lam.size))
    rayleigh = float(y @ (a @ y))
    for _ in range(15):
        y = scipy.linalg.cho_solve(cho, y, check_finite=False)
        y /= np.linalg.norm(y)
        new_rayleigh = float(y @ (ctx.w @ y)) - float(lam @ (y * y)) + ctx.eps
        if abs(new_rayleigh - rayleigh) <= 1e-9 * max(1.0, abs(new_rayleigh)):
            rayleigh = new_rayleigh
            break
        rayleigh = new_rayleigh
    return WitnessReport(
        order=order,
        min_eig=max(rayleigh - ctx.eps, -ctx.eps),
        violated=False,
        witness_trace=ctx.trace,
        scale=ctx.scale,
        tol=tol,
        certificate=None,
    )


def _report_from_dense(ctx: _WitnessContext, p_op: np.ndarray, order: int, tol: float) -> WitnessReport:
    val, vec = min_eigenvalue(ctx.w - p_op)
    violated = val < -tol * ctx.scale
    return WitnessReport(
        order=order,
        min_eig=val,
        violated=violated,
        witness_trace=ctx.trace,
        scale=ctx.scale,
        tol=tol,
        certificate=vec if violated else None,
    )


def _report_from_low_rank(ctx: _WitnessContext, v: np.ndarray, order: int, tol: float) -> WitnessReport:
    # X = M^{-1} V via the cached Cholesky factor; complex split into
    # real and imaginary solves because the factor is real
    x = scipy.linalg.cho_solve(ctx.cho, v.real.copy()) + 1j * scipy.linalg.cho_solve(
        ctx.cho, v.imag.copy()
    )
    q, _ = np.linalg.qr(x)
    # contiguous copies: strided real/imag views of complex arrays miss BLAS
    wq = ctx.w @ q.real.copy() + 1j * (ctx.w @ q.imag.copy())
    a_small = q.conj().T @ wq
    b = q.conj().T @ v
    a_small = a_small - b @ b.conj().T
    a_small = (a_small + a_small.conj().T) / 2
    vals, vecs = np.linalg.eigh(a_small)
    val = float(vals[0])
    violated = val < -tol * ctx.scale
    certificate = None
    if violated:
        certificate = q @ vecs[:, 0]
        certificate = certificate / np.linalg.norm(certificate)
    return WitnessReport(
        order=order,
        min_eig=val,
        violated=violated,
        witness_trace=ctx.trace,
        scale=ctx.scale,
        tol=tol,
        certificate=certificate,
    )


def _check_against_witness(
    p: ProductState,
    n: int,
    tol: float,
    max_nm: int,
    max_dense: int,
    ortho_v: int | None,
) -> WitnessReport:
    if n < 1:
        raise ValueError("order must be positive")
    ctx = _context(p.scenario, n, tol, max_nm, max_dense, ortho_v)
    dim = p.scenario.marginal_dim**n
    lhs_scale = 1.0 if ortho_v is None else float(ortho_v ** (n * p.scenario.m))
    if dim <= DENSE_EIG_BOUND:
        rho = assemble_product(p)
        p_op = rho
        for _ in range(n - 1):
            p_op = np.kron(p_op, rho)
        return _report_from_dense(ctx, lhs_scale * p_op, n, tol)
    rank = 1
    for f in p.factors:
        rank *= int(np.sum(np.linalg.eigvalsh(f) > FACTOR_EIG_CUTOFF))
    if rank**n <= LOWRANK_MAX_COLUMNS:
        return _report_from_low_rank(ctx, _low_rank_factor(p, n, scale=lhs_scale), n, tol)
    if p.scenario.classify() == "disjoint" and all(
        len(c) == 1 for c in p.scenario.contexts
    ):
        return _report_from_product_diagonal(ctx, p, n, tol, lhs_scale)
    rho = assemble_product(p)
    p_op = rho
    for _ in range(n - 1):
        p_op = np.kron(p_op, rho)
    return _report_from_dense(ctx, lhs_scale * p_op, n, tol)


def check_order_n(
    p: ProductState,
    n: int,
    tol: float = VIOLATION_TOL_DEFAULT,
    max_nm: int = MAX_NM_DEFAULT,
    max_dense: int = MAX_DENSE_DEFAULT,
) -> WitnessReport:
    """Check the order-n product-state inequality; violation certifies
    incompatibility, non-violation is inconclusive at this order."""
    return _check_against_witness(p, n, tol, max_nm, max_dense, ortho_v=None)


def find_min_violating_order(
    p: ProductState,
    n_max: int,
    tol: float = VIOLATION_TOL_DEFAULT,
    max_nm: int = MAX_NM_DEFAULT,
    max_dense: int = MAX_DENSE_DEFAULT,
) -> int | None:
    """Smallest order up to n_max whose check reports a violation, else None
    (meaning inconclusive up to n_max, not compatible)."""
    for n in range(1, n_max + 1):
        if check_order_n(p, n, tol, max_nm, max_dense).violated:
            return n
    return None


def check_ortho_count(
    p: ProductState,
    v: int,
    n: int,
    tol: float = VIOLATION_TOL_DEFAULT,
    max_nm: int = MAX_NM_DEFAULT,
    max_dense: int = MAX_DENSE_DEFAULT,
) -> WitnessReport:
    """Check v^{nm} * rho_M^⊗n against the character-weighted witness built
    from partitions with at most v rows; violation certifies that no v
    mutually orthogonal joint extensions exist.  v=1 coincides with
    check_order_n."""
    if v < 1:
        raise ValueError("v must be a positive integer")
    return _check_against_witness(p, n, tol, max_nm, max_dense, ortho_v=v)


def definetti_validate(
    scenario: MarginalScenario,
    n: int,
    n_samples: int,
    seed: int = 0,
    max_nm: int = MAX_NM_DEFAULT,
    max_dense: int = MAX_DENSE_DEFAULT,
) -> float:
    """Monte-Carlo check of the measure-integral identity behind the witness:
    the binomially-scaled Haar average of tau(psi)^⊗n should reproduce W_n.
    Returns the relative Frobenius error (expected O(1/sqrt(N)))."""
    if n_samples < 1:
        raise ValueError("need at least one sample")
    w = build_witness(scenario, n, max_nm, max_dense)
    d_j = scenario.joint.joint_dim
    k = n * scenario.m
    prefactor = math.comb(k + d_j - 1, k)
    dims = scenario.joint.dims
    labels = scenario.joint.labels
    d_m = scenario.marginal_dim
    dim_total = d_m**n

    letters = "abcdefghijklmnopqrstuvwxy"
    rng = np.random.default_rng(seed)
    acc = np.zeros((dim_total, dim_total), dtype=complex)
    chunk = max(1, min(4096, 2_000_000 // (dim_total * dim_total)))
    done = 0
    while done < n_samples:
        b = min(chunk, n_samples - done)
        psi = rng.standard_normal((b, d_j)) + 1j * rng.standard_normal((b, d_j))
        psi /= np.linalg.norm(psi, axis=1, keepdims=True)
        psi_t = psi.reshape((b,) + dims)
        # per-context batched marginals straight from the vectors
        margs = []
        for ctx in scenario.contexts:
            row = []
            col = []
            out_row = []
            out_col = []
            for i, label in enumerate(labels):
                if label in ctx:
                    row.append(letters[2 * i])
                    col.append(letters[2 * i + 1])
                    out_row.append(letters[2 * i])
                    out_col.append(letters[2 * i + 1])
                else:
                    row.append(letters[2 * i])
                    col.append(letters[2 * i])
            sub = f"z{''.join(row)},z{''.join(col)}->z{''.join(out_row + out_col)}"
            dk = scenario.joint.subdim(ctx)
            margs.append(np.einsum(sub, psi_t, psi_t.conj()).reshape(b, dk, dk))
        prod = margs[0]
        for nxt in margs[1:]:
            d1, d2 = prod.shape[1], nxt.shape[1]
            prod = np.einsum("zab,zcd->zacbd", prod, nxt).reshape(b, d1 * d2, d1 * d2)
        power = prod
        for _ in range(n - 1):
            d1 = power.shape[1]
            power = np.einsum("zab,zcd->zacbd", power, prod).reshape(
                b, d1 * d_m, d1 * d_m
            )
        acc += power.sum(axis=0)
        done += b
    estimate = prefactor * acc / n_samples
    return float(np.linalg.norm(estimate - w) / np.linalg.norm(w))
