"""Joint contexts, marginal scenarios, product states, and partial traces.

A joint context is an ordered list of labeled subsystems with dimensions;
a marginal scenario selects an ordered list of (possibly overlapping,
possibly repeated) sublists of those labels.  All Kronecker conventions
follow the joint-context order restricted to the context in question.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

HERMITICITY_TOL = 1e-12
DENSITY_TOL = 1e-10
PURITY_TOL = 1e-10

# largest joint dimension accepted at construction; matrices on H_J itself
# only appear in tests and oracles, never in the witness path
MAX_JOINT_DIM = 4096


def check_hermitian(mat: np.ndarray, tol: float = HERMITICITY_TOL) -> np.ndarray:
    """Validate and return a square complex matrix that is Hermitian within tol."""
    m = np.asarray(mat, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    dev = float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0
    if dev > tol:
        raise ValueError(f"matrix is not Hermitian: max |M - M†| = {dev:.3e} > {tol}")
    return m


def check_density(mat: np.ndarray) -> np.ndarray:
    """Validate a density operator: Hermitian, PSD within -1e-10, trace 1 ± 1e-10."""
    m = check_hermitian(mat, tol=DENSITY_TOL)
    tr = complex(np.trace(m))
    if abs(tr - 1.0) > DENSITY_TOL:
        raise ValueError(f"density operator must have unit trace, got {tr}")
    evs = np.linalg.eigvalsh(m)
    if evs[0] < -DENSITY_TOL:
        raise ValueError(f"density operator must be PSD, min eigenvalue {evs[0]:.3e}")
    return m


@dataclass(frozen=True)
class JointContext:
    """Ordered labeled subsystems making up the joint Hilbert space."""

    labels: tuple[str, ...]
    dims: tuple[int, ...]

    def __post_init__(self):
        if len(self.labels) != len(self.dims) or not self.labels:
            raise ValueError("labels and dims must be nonempty and equal length")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError(f"labels must be unique: {self.labels}")
        if any(d < 2 for d in self.dims):
            raise ValueError(f"subsystem dims must be >= 2: {self.dims}")
        if self.joint_dim > MAX_JOINT_DIM:
            raise ValueError(
                f"joint dimension {self.joint_dim} exceeds the bound {MAX_JOINT_DIM}"
            )

    @property
    def joint_dim(self) -> int:
        return math.prod(self.dims)

    def dim_of(self, label: str) -> int:
        try:
            return self.dims[self.labels.index(label)]
        except ValueError:
            raise ValueError(f"unknown label {label!r}; joint labels are {self.labels}")

    def subdim(self, labels: Sequence[str]) -> int:
        return math.prod(self.dim_of(l) for l in labels)

    def canonical(self, labels: Sequence[str]) -> tuple[str, ...]:
        """The labels reordered to joint-context order (fixes Kronecker order)."""
        for l in labels:
            if l not in self.labels:
                raise ValueError(f"unknown label {l!r}; joint labels are {self.labels}")
        return tuple(l for l in self.labels if l in set(labels))


@dataclass(frozen=True)
class MarginalScenario:
    """A joint context plus an ordered list of contexts to marginalize onto."""

    joint: JointContext
    contexts: tuple[tuple[str, ...], ...]

    def __post_init__(self):
        if not self.contexts:
            raise ValueError("need at least one context")
        canon = []
        for ctx in self.contexts:
            if not ctx:
                raise ValueError("contexts must be nonempty")
            canon.append(self.joint.canonical(ctx))
        object.__setattr__(self, "contexts", tuple(canon))

    @property
    def m(self) -> int:
        return len(self.contexts)

    @property
    def marginal_dim(self) -> int:
        return math.prod(self.joint.subdim(c) for c in self.contexts)

    def classify(self) -> str:
        """disjoint / overlapping / degenerate per the context overlap pattern."""
        sets = [set(c) for c in self.contexts]
        if len(set(self.contexts)) < self.m or any(
            s == set(self.joint.labels) for s in sets
        ):
            return "degenerate"
        for i in range(self.m):
            for j in range(i + 1, self.m):
                if sets[i] & sets[j]:
                    return "overlapping"
        return "disjoint"


def validate_scenario(scenario: MarginalScenario) -> str:
    return scenario.classify()


@dataclass(frozen=True)
class ProductState:
    """Factors rho_{S_1}, ..., rho_{S_m} of a candidate product marginal."""

    scenario: MarginalScenario
    factors: tuple[np.ndarray, ...]

    def __post_init__(self):
        if len(self.factors) != self.scenario.m:
            raise ValueError(
                f"expected {self.scenario.m} factors, got {len(self.factors)}"
            )
        checked = []
        for ctx, f in zip(self.scenario.contexts, self.factors):
            want = self.scenario.joint.subdim(ctx)
            f = check_density(f)
            if f.shape[0] != want:
                raise ValueError(
                    f"factor for context {ctx} must be {want}x{want}, got {f.shape}"
                )
            f = f.copy()
            f.flags.writeable = False
            checked.append(f)
        object.__setattr__(self, "factors", tuple(checked))


def assemble_product(p: ProductState) -> np.ndarray:
    """Kronecker product of the factors in context order; acts on H_M."""
    out = np.array([[1.0 + 0j]])
    for f in p.factors:
        out = np.kron(out, f)
    return out


def partial_trace(
    op: np.ndarray, joint: JointContext, keep: Sequence[str]
) -> np.ndarray:
    """Tr over the joint subsystems not named in keep; preserves Hermiticity."""
    keep_c = joint.canonical(keep)
    m = np.asarray(op, dtype=complex)
    d_j = joint.joint_dim
    if m.shape != (d_j, d_j):
        raise ValueError(f"operator must be {d_j}x{d_j} for this joint context")
    t = m.reshape(joint.dims + joint.dims)
    traced = [i for i, l in enumerate(joint.labels) if l not in set(keep_c)]
    for count, idx in enumerate(traced):
        eff = idx - count  # earlier np.trace calls shifted this axis left
        t = np.trace(t, axis1=eff, axis2=eff + t.ndim // 2)
    d_keep = joint.subdim(keep_c)
    return t.reshape(d_keep, d_keep)


def tau_map(psi: np.ndarray, scenario: MarginalScenario) -> ProductState:
    """Marginal product of a pure joint state: factor i is Tr_{J\\S_i}(psi)."""
    m = check_density(psi)
    purity = float(np.real(np.trace(m @ m)))
    if abs(purity - 1.0) > PURITY_TOL:
        raise ValueError(f"input must be pure: Tr(psi^2) = {purity}")
    factors = tuple(
        partial_trace(m, scenario.joint, ctx) for ctx in scenario.contexts
    )
    return ProductState(scenario, factors)


def haar_sample_pure(joint: JointContext, seed=None) -> np.ndarray:
    """Rank-1 density operator of a Haar-random pure state on H_J."""
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(joint.joint_dim) + 1j * rng.standard_normal(joint.joint_dim)
    v /= np.linalg.norm(v)
    return np.outer(v, v.conj())


def haar_compatible_state(scenario: MarginalScenario, seed=None) -> ProductState:
    """tau_map of a Haar sample: a certified-compatible product marginal."""
    return tau_map(haar_sample_pure(scenario.joint, seed), scenario)
