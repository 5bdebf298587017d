import itertools
import math

import numpy as np
import pytest

from qmarginal.diagrams import (
    GuardExceeded,
    Perm,
    PermTermSum,
    contract_scenario_permutation,
    kept_wires,
    materialize,
    permutation_matrix,
    symmetrizer_contraction,
    trace_permutation_wires,
    _positions,
)
from qmarginal.operators import sym_projector
from qmarginal.scenario import JointContext, MarginalScenario


def dense_wire_trace(op, dims, traced):
    """Partial trace over the listed wire indices, via reshape and einsum."""
    k = len(dims)
    t = op.reshape(tuple(dims) + tuple(dims))
    letters = "abcdefghijklmnopqrstuvwx"
    row = list(letters[:k])
    col = list(letters[k : 2 * k])
    for w in traced:
        col[w] = row[w]
    kept = [i for i in range(k) if i not in traced]
    out = "".join(row[i] for i in kept) + "".join(letters[k + i] for i in kept)
    kept_total = math.prod(dims[i] for i in kept)
    return np.einsum("".join(row + col) + "->" + out, t).reshape(
        kept_total, kept_total
    )


class TestPerm:
    def test_identity_compose_inverse(self):
        p = Perm((1, 2, 0))
        assert p.compose(p.inverse()).images == (0, 1, 2)
        assert Perm.identity(3).images == (0, 1, 2)

    def test_rejects_non_bijection(self):
        with pytest.raises(ValueError):
            Perm((0, 0, 1))

    def test_cycles_and_type(self):
        p = Perm((1, 0, 2, 4, 3))
        assert p.cycle_type() == (2, 2, 1)
        assert sorted(len(c) for c in p.cycles()) == [1, 2, 2]

    def test_call(self):
        assert Perm((2, 0, 1))(0) == 2


class TestPermutationMatrix:
    def test_swap_qubits(self):
        swap = permutation_matrix(Perm((1, 0)), (2, 2))
        expected = np.zeros((4, 4), dtype=np.int64)
        for i, j in itertools.product(range(2), repeat=2):
            expected[2 * j + i, 2 * i + j] = 1
        assert np.array_equal(swap, expected)

    def test_identity(self):
        assert np.array_equal(
            permutation_matrix(Perm((0, 1)), (2, 3)), np.eye(6, dtype=np.int64)
        )

    def test_composition_is_matrix_product(self, rng):
        d = (2, 2, 2)
        for _ in range(10):
            a = Perm(tuple(rng.permutation(3)))
            b = Perm(tuple(rng.permutation(3)))
            ma, mb = permutation_matrix(a, d), permutation_matrix(b, d)
            mc = permutation_matrix(a.compose(b), d)
            assert np.array_equal(ma @ mb, mc)


class TestFirstReturnTrace:
    @pytest.mark.parametrize("d", [1, 2, 3])
    @pytest.mark.parametrize("k", [2, 3])
    def test_oracle_all_permutations(self, k, d):
        dims = (d,) * k
        for images in itertools.permutations(range(k)):
            perm = Perm(images)
            full = permutation_matrix(perm, dims)
            for r in range(1, k):
                for traced in itertools.combinations(range(k), r):
                    coeff, residual = trace_permutation_wires(perm, traced, d)
                    kept_dims = (d,) * (k - r)
                    expected = dense_wire_trace(full, dims, traced)
                    got = coeff * permutation_matrix(residual, kept_dims)
                    assert np.array_equal(got, expected), (images, traced, d)

    def test_full_cycle_traced_gives_dimension(self):
        # tracing a whole 3-cycle leaves a scalar d
        coeff, residual = trace_permutation_wires(Perm((1, 2, 0, 3)), (0, 1, 2), 5)
        assert coeff == 5
        assert residual.images == (0,)


class TestScenarioContraction:
    def test_kept_wires_chain(self, chain_scenario):
        kw = kept_wires(chain_scenario, 1)
        # wire t = b*m + i keeps label X iff X in S_i
        assert kw == {"A": (0,), "B": (0, 1), "C": (1,)}

    def test_disjoint_identity_and_swap(self, pair_scenario):
        coeff, res = contract_scenario_permutation(pair_scenario, 1, Perm((0, 1)))
        assert coeff == 4 and all(r.images == (0,) for r in res.values())
        coeff, res = contract_scenario_permutation(pair_scenario, 1, Perm((1, 0)))
        assert coeff == 1 and all(r.images == (0,) for r in res.values())

    def test_disjoint_collected_terms(self, pair_scenario):
        ts = symmetrizer_contraction(pair_scenario, 1)
        assert ts.denominator == 2
        assert ts.terms == {(((0,)), ((0,))): 5} or list(ts.terms.values()) == [5]

    def test_guard_names_bound(self, triple_scenario):
        with pytest.raises(GuardExceeded, match="max_nm"):
            symmetrizer_contraction(triple_scenario, 3, max_nm=8)


class TestMaterialize:
    def test_disjoint_closed_form(self):
        for a, b in itertools.product((2, 3), repeat=2):
            sc = MarginalScenario(
                JointContext(("A", "B"), (a, b)), (("A",), ("B",))
            )
            w = materialize(symmetrizer_contraction(sc, 1))
            assert np.array_equal(w, (1 + a * b) / 2 * np.eye(a * b))

    @pytest.mark.parametrize("d,n", [(2, 2), (2, 3), (3, 2)])
    def test_single_context_gives_symmetric_projector(self, d, n):
        sc = MarginalScenario(JointContext(("X",), (d,)), (("X",),))
        w = materialize(symmetrizer_contraction(sc, n))
        assert np.allclose(w, sym_projector(d, n), atol=1e-14)

    @pytest.mark.parametrize(
        "scenario_fixture,n",
        [("pair_scenario", 2), ("chain_scenario", 1), ("triple_scenario", 1)],
    )
    def test_against_permutation_matrix_sum(self, scenario_fixture, n, request):
        # independent reconstruction: every collected term is an explicit
        # permutation matrix on the position wires
        sc = request.getfixturevalue(scenario_fixture)
        ts = symmetrizer_contraction(sc, n)
        pos, pdims = _positions(sc, n)
        pos_index = {pl: i for i, pl in enumerate(pos)}
        kw = ts.kept
        labels = sc.joint.labels
        total = sc.marginal_dim**n
        expected = np.zeros((total, total))
        for key, coeff in ts.terms.items():
            images = [0] * len(pos)
            for p, (t, label) in enumerate(pos):
                res = key[labels.index(label)]
                q = kw[label].index(t)
                images[p] = pos_index[(kw[label][res[q]], label)]
            expected += coeff * permutation_matrix(Perm(tuple(images)), tuple(pdims))
        expected /= ts.denominator
        got = materialize(ts)
        assert np.allclose(got, expected, atol=1e-12)
        assert np.array_equal(got, got.T)

    def test_trace_identity(self, chain_scenario):
        for n in (1, 2):
            w = materialize(symmetrizer_contraction(chain_scenario, n))
            k = n * chain_scenario.m
            d_j = chain_scenario.joint.joint_dim
            assert np.trace(w) == math.comb(k + d_j - 1, k)

    def test_dense_guard(self, triple_scenario):
        ts = symmetrizer_contraction(triple_scenario, 2)
        with pytest.raises(GuardExceeded, match="max_dense"):
            materialize(ts, max_dense=100)

    def test_term_sum_rejects_zero_coefficients(self, pair_scenario):
        with pytest.raises(ValueError):
            PermTermSum(
                pair_scenario, 1, 2, {(((0,),), ((0,),)): 0}
            )
