"""Command-line surface and JSON serialization.

Scenario files are JSON objects:

    {
      "subsystems": [{"label": "A", "dim": 2}, {"label": "B", "dim": 2}],
      "contexts":   [["A"], ["B"]],
      "states":     [matrix, matrix]          // optional, one per context
    }

where a matrix is a list of rows and every entry is a two-element
[real, imaginary] pair.  Matrices must be Hermitian density operators
within 1e-10.

Exit codes: 0 = no violation found (inconclusive or consistent),
3 = violation certified, 2 = input or guard error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from typing import Any

import numpy as np

from . import __version__
from .bipartite import bipartite_compatible, bipartite_inequality_check, bipartite_rate, descending_spectrum
from .combinatorics import enumerate_partitions
from .diagrams import MAX_DENSE_DEFAULT, MAX_NM_DEFAULT, GuardExceeded
from .keyl import (
    DiagonalizedState,
    discrimination_constant,
    discrimination_ratio,
    keyl_divergence,
    lambda_sequence,
    sampled_rate_upper_bound,
)
from .scenario import JointContext, MarginalScenario, ProductState, assemble_product
from .witness import (
    WitnessReport,
    build_witness,
    check_order_n,
    check_ortho_count,
    definetti_validate,
)

DEFAULT_SEED = 7
SCHEMA_VERSION = 1


class InputError(Exception):
    """User-facing input problem; maps to exit code 2."""


# ---------------------------------------------------------------- parsing

def _complex_entry(value: Any, where: str) -> complex:
    if (
        not isinstance(value, (list, tuple))
        or len(value) != 2
        or not all(isinstance(c, (int, float)) for c in value)
    ):
        raise InputError(
            f"{where}: matrix entries must be [real, imaginary] pairs, got {value!r}"
        )
    return complex(value[0], value[1])


def matrix_from_json(rows: Any, where: str) -> np.ndarray:
    if not isinstance(rows, list) or not rows:
        raise InputError(f"{where}: expected a nonempty list of rows")
    n = len(rows)
    out = np.zeros((n, n), dtype=complex)
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != n:
            raise InputError(f"{where}, row {i}: expected {n} entries")
        for j, entry in enumerate(row):
            out[i, j] = _complex_entry(entry, f"{where}[{i}][{j}]")
    return out


def matrix_to_json(m: np.ndarray) -> list:
    return [[[float(v.real), float(v.imag)] for v in row] for row in np.asarray(m, complex)]


def serialize_scenario(scenario: MarginalScenario, states=None) -> dict:
    doc = {
        "subsystems": [
            {"label": l, "dim": d}
            for l, d in zip(scenario.joint.labels, scenario.joint.dims)
        ],
        "contexts": [list(c) for c in scenario.contexts],
    }
    if states is not None:
        doc["states"] = [matrix_to_json(s) for s in states]
    return doc


def parse_scenario_document(data: Any, where: str = "scenario") -> tuple[MarginalScenario, ProductState | None]:
    if not isinstance(data, dict):
        raise InputError(f"{where}: top level must be a JSON object")
    subs = data.get("subsystems")
    if not isinstance(subs, list) or not subs:
        raise InputError(f"{where}: 'subsystems' must be a nonempty list")
    labels, dims = [], []
    for i, sub in enumerate(subs):
        if not isinstance(sub, dict) or "label" not in sub or "dim" not in sub:
            raise InputError(
                f"{where}: subsystems[{i}] must be an object with 'label' and 'dim'"
            )
        labels.append(str(sub["label"]))
        if not isinstance(sub["dim"], int):
            raise InputError(f"{where}: subsystems[{i}].dim must be an integer")
        dims.append(sub["dim"])
    contexts = data.get("contexts")
    if not isinstance(contexts, list) or not contexts:
        raise InputError(f"{where}: 'contexts' must be a nonempty list of label lists")
    try:
        joint = JointContext(tuple(labels), tuple(dims))
        scenario = MarginalScenario(
            joint, tuple(tuple(str(l) for l in ctx) for ctx in contexts)
        )
    except ValueError as exc:
        raise InputError(f"{where}: {exc}") from exc
    state = None
    if data.get("states") is not None:
        raw = data["states"]
        if not isinstance(raw, list) or len(raw) != scenario.m:
            raise InputError(
                f"{where}: 'states' must list one matrix per context "
                f"({scenario.m} expected)"
            )
        mats = [matrix_from_json(r, f"{where}.states[{i}]") for i, r in enumerate(raw)]
        try:
            state = ProductState(scenario, tuple(mats))
        except ValueError as exc:
            raise InputError(f"{where}: {exc}") from exc
    return scenario, state


def load_scenario_file(path: str) -> tuple[MarginalScenario, ProductState | None]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(
            f"{path}: JSON parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    return parse_scenario_document(data, where=path)


def _require_two_states(path: str) -> tuple[np.ndarray, np.ndarray]:
    _, state = load_scenario_file(path)
    if state is None or len(state.factors) != 2:
        raise InputError(f"{path}: need a file with exactly two states")
    return state.factors[0], state.factors[1]


# ---------------------------------------------------------------- reports

def _report_dict(r: WitnessReport) -> dict:
    return {
        "order": r.order,
        "min_eig": r.min_eig,
        "violated": r.violated,
        "verdict": r.verdict,
        "witness_trace": r.witness_trace,
        "scale": r.scale,
        "tol": r.tol,
    }


def _print_report(r: WitnessReport) -> None:
    print(
        f"order {r.order}: min_eig = {r.min_eig:+.9e}  "
        f"(tol {r.tol:g} x scale {r.scale:.6g})  -> {r.verdict}"
    )


def _emit(args, payload: dict) -> None:
    if args.json:
        print(json.dumps(payload, indent=2, sort_keys=True))


# ---------------------------------------------------------------- commands

def cmd_check(args) -> int:
    scenario, state = load_scenario_file(args.file)
    if state is None:
        raise InputError(f"{args.file}: 'states' are required for check")
    if args.order is not None and args.scan is not None:
        raise InputError("--order and --scan are mutually exclusive")
    if args.scan is None:
        orders = [args.order if args.order is not None else 1]
    else:
        orders = list(range(1, args.scan + 1))
    reports = []
    for n in orders:
        r = check_order_n(state, n, tol=args.tol, max_nm=args.max_nm, max_dense=args.max_dense)
        reports.append(r)
        if not args.json:
            _print_report(r)
        if r.violated:
            break
    violated = any(r.violated for r in reports)
    payload = {
        "schema_version": SCHEMA_VERSION,
        "command": "check",
        "reports": [_report_dict(r) for r in reports],
        "violated": violated,
    }
    if not args.json:
        if violated:
            print(f"incompatibility certified at order {reports[-1].order}")
        else:
            top = orders[-1]
            print(f"inconclusive up to n={top} (no violation found; not a compatibility proof)")
    if args.rate_samples:
        bound = sampled_rate_upper_bound(state, args.rate_samples, seed=args.seed)
        payload["rate_upper_bound"] = {
            "value": bound,
            "samples": args.rate_samples,
            "seed": args.seed,
            "heuristic": True,
        }
        if not args.json:
            print(
                f"sampled incompatibility-rate upper bound (heuristic, "
                f"N={args.rate_samples}, seed={args.seed}): {bound:.6g}"
            )
    _emit(args, payload)
    return 3 if violated else 0


def _triple_scenario() -> MarginalScenario:
    return MarginalScenario(
        JointContext(("A", "B", "C"), (2, 2, 2)),
        (("A", "B"), ("A", "C"), ("B", "C")),
    )


def triple_contraction_vector() -> np.ndarray:
    """Unit vector on the (AB,AC,BC) qubit marginal space pairing the two
    copies of each label into a singlet."""
    phi = np.zeros((2, 2))
    phi[0, 1], phi[1, 0] = 1 / math.sqrt(2), -1 / math.sqrt(2)
    w = np.zeros((2,) * 6)
    for j in np.ndindex(*(2,) * 6):
        w[j] = phi[j[0], j[2]] * phi[j[1], j[4]] * phi[j[3], j[5]]
    return w.ravel()


def _triple_states() -> dict[str, tuple[np.ndarray, np.ndarray, np.ndarray]]:
    singlet_vec = np.array([0, 1, -1, 0], dtype=complex) / math.sqrt(2)
    singlet = np.outer(singlet_vec, singlet_vec.conj())
    anti = np.diag([0, 0.5, 0.5, 0]).astype(complex)
    mixed = np.eye(4, dtype=complex) / 4
    s00 = np.zeros((4, 4), complex)
    s00[0, 0] = 1
    s11 = np.zeros((4, 4), complex)
    s11[3, 3] = 1
    return {
        "triple_singlet": (singlet, singlet, singlet),
        "anticorrelated": (anti, anti, anti),
        "maximally_mixed": (mixed, mixed, mixed),
        "inconsistent_00_11": (s00, s11, s00),
    }


def cmd_reproduce(args) -> int:
    sc3 = _triple_scenario()
    w1 = build_witness(sc3, 1)
    w = triple_contraction_vector()
    overlap_w1 = float(w @ w1 @ w)
    overlaps = {}
    for name, factors in _triple_states().items():
        rho = assemble_product(ProductState(sc3, factors))
        overlaps[name] = float(np.real(w @ rho @ w))

    identity = {}
    for a in (2, 3):
        for b in (2, 3):
            sc = MarginalScenario(
                JointContext(("A", "B"), (a, b)), (("A",), ("B",))
            )
            wab = build_witness(sc, 1)
            target = (1 + a * b) / 2
            deviation = float(np.max(np.abs(wab - target * np.eye(a * b))))
            identity[f"{a}x{b}"] = {"value": target, "max_deviation": deviation}

    sc_xx = MarginalScenario(JointContext(("X",), (2,)), (("X",), ("X",)))
    e0 = np.zeros((2, 2), complex)
    e0[0, 0] = 1
    plus = np.full((2, 2), 0.5, dtype=complex)
    same = check_order_n(ProductState(sc_xx, (e0, e0)), 1)
    differ = check_order_n(ProductState(sc_xx, (e0, plus)), 1)
    purity = {
        "identical_pure": {
            "state_overlap": 1.0,
            "min_eig": same.min_eig,
            "verdict": same.verdict,
        },
        "distinct_pure": {
            "state_overlap": 0.5,
            "min_eig": differ.min_eig,
            "verdict": differ.verdict,
        },
    }

    if not args.json:
        print("three-qubit contraction overlaps <w|rho_M|w> on (AB,AC,BC):")
        print(f"  <w|W_1|w> (witness side)     {overlap_w1:+.15g}")
        for name, val in overlaps.items():
            print(f"  {name:<27}{val:+.15g}")
        print("expected: anticorrelated 2^-5, triple_singlet 2^-4,")
        print("          maximally_mixed 2^-6, inconsistent_00_11 0")
        print()
        print("disjoint-pair identity W_1 = ((1+ab)/2) I:")
        for key, rec in identity.items():
            print(
                f"  a x b = {key}: (1+ab)/2 = {rec['value']:g}, "
                f"max |W_1 - value*I| = {rec['max_deviation']:g}"
            )
        print()
        print("repeated-context purity criterion (X,X), n=1 (violated iff Tr(rho sigma) < 1):")
        for name, rec in purity.items():
            print(
                f"  {name}: Tr(rho sigma) = {rec['state_overlap']:g}, "
                f"min_eig = {rec['min_eig']:+.9e} -> {rec['verdict']}"
            )
    payload = {
        "schema_version": SCHEMA_VERSION,
        "command": "reproduce",
        "contraction_overlaps": overlaps,
        "witness_side_overlap": overlap_w1,
        "disjoint_identity": identity,
        "purity_criterion": purity,
    }
    _emit(args, payload)
    return 0


def cmd_keyl(args) -> int:
    rho, sigma = _require_two_states(args.file)
    if rho.shape != sigma.shape:
        raise InputError("keyl needs two states of equal dimension")
    ctx = DiagonalizedState.from_state(rho)
    div = keyl_divergence(ctx, sigma)
    s = ctx.spectrum
    const = discrimination_constant(s)
    t = math.comb(s.size + 1, 2)
    rows = []
    for n in range(1, args.n_max + 1):
        lam = lambda_sequence(s, n)
        ratio = discrimination_ratio(ctx, sigma, n)
        bound = (
            const * math.exp(-(n - t + 1) * div) if div < math.inf else 0.0
        )
        rows.append({"n": n, "shape": list(lam), "ratio": ratio, "bound": bound})
    if not args.json:
        print(f"divergence K(rho||sigma) = {div:.12g}")
        print(f"spectrum s = {np.array2string(s, precision=10)}")
        print(f"constant D(s) = {const:.12g}")
        print(f"{'n':>4}  {'shape':<18}{'ratio':>14}{'bound':>14}")
        for row in rows:
            print(
                f"{row['n']:>4}  {str(tuple(row['shape'])):<18}"
                f"{row['ratio']:>14.6e}{row['bound']:>14.6e}"
            )
    payload = {
        "schema_version": SCHEMA_VERSION,
        "command": "keyl",
        "divergence": div if div < math.inf else "inf",
        "constant": const,
        "spectrum": [float(x) for x in s],
        "rows": rows,
    }
    _emit(args, payload)
    return 0


def cmd_definetti(args) -> int:
    scenario, _ = load_scenario_file(args.file)
    err = definetti_validate(
        scenario,
        args.n,
        args.samples,
        seed=args.seed,
        max_nm=args.max_nm,
        max_dense=args.max_dense,
    )
    k = args.n * scenario.m
    d_j = scenario.joint.joint_dim
    norm = math.comb(k + d_j - 1, k)
    if not args.json:
        print(
            f"relative Frobenius error {err:.6g} over {args.samples} samples "
            f"(seed {args.seed}, normalization C({k + d_j - 1},{k}) = {norm})"
        )
    _emit(
        args,
        {
            "schema_version": SCHEMA_VERSION,
            "command": "definetti",
            "relative_error": err,
            "samples": args.samples,
            "seed": args.seed,
            "normalization": norm,
        },
    )
    return 0


def cmd_ortho(args) -> int:
    _, state = load_scenario_file(args.file)
    if state is None:
        raise InputError(f"{args.file}: 'states' are required for ortho")
    r = check_ortho_count(
        state, args.v, args.order, tol=args.tol, max_nm=args.max_nm, max_dense=args.max_dense
    )
    if not args.json:
        print(f"orthogonal-count test with v = {args.v}:")
        _print_report(r)
        if r.violated:
            print(f"certified: fewer than {args.v} mutually orthogonal joint solutions")
        else:
            print("inconclusive at this order")
    _emit(
        args,
        {
            "schema_version": SCHEMA_VERSION,
            "command": "ortho",
            "v": args.v,
            "report": _report_dict(r),
        },
    )
    return 3 if r.violated else 0


def cmd_bipartite(args) -> int:
    rho_a, rho_b = _require_two_states(args.file)
    sa = descending_spectrum(rho_a)
    sb = descending_spectrum(rho_b)
    compatible = bipartite_compatible(rho_a, rho_b, tol=args.tol)
    rate = bipartite_rate(tuple(sa), tuple(sb), min(sa.size, sb.size))
    table = []
    all_hold = True
    if args.order is not None:
        n = args.order
        for alpha in enumerate_partitions(n, sa.size):
            for beta in enumerate_partitions(n, sb.size):
                lhs, rhs, holds = bipartite_inequality_check(rho_a, rho_b, n, alpha, beta)
                all_hold = all_hold and holds
                table.append(
                    {"alpha": list(alpha), "beta": list(beta), "lhs": lhs, "rhs": rhs, "holds": holds}
                )
    if not args.json:
        print(f"spectrum A: {np.array2string(sa, precision=10)}")
        print(f"spectrum B: {np.array2string(sb, precision=10)}")
        print(f"compatible (equal spectra within {args.tol:g}): {compatible}")
        rate_text = "inf" if rate == math.inf else f"{rate:.12g}"
        print(f"incompatibility rate Omega = {rate_text}")
        if table:
            print(f"{'alpha':<12}{'beta':<12}{'lhs':>14}{'rhs':>14}  holds")
            for row in table:
                print(
                    f"{str(tuple(row['alpha'])):<12}{str(tuple(row['beta'])):<12}"
                    f"{row['lhs']:>14.6e}{row['rhs']:>14.6e}  {row['holds']}"
                )
    payload = {
        "schema_version": SCHEMA_VERSION,
        "command": "bipartite",
        "compatible": compatible,
        "rate": rate if rate < math.inf else "inf",
        "spectrum_a": [float(x) for x in sa],
        "spectrum_b": [float(x) for x in sb],
        "inequalities": table,
    }
    _emit(args, payload)
    if not compatible or not all_hold:
        return 3
    return 0


# ---------------------------------------------------------------- wiring

def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tol", type=float, default=1e-9, help="violation tolerance (default 1e-9)")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED, help=f"RNG seed (default {DEFAULT_SEED})")
    p.add_argument("--json", action="store_true", help="emit a JSON report")
    p.add_argument("--max-nm", type=int, default=MAX_NM_DEFAULT, help=f"permutation-sweep guard (default {MAX_NM_DEFAULT})")
    p.add_argument("--max-dense", type=int, default=MAX_DENSE_DEFAULT, help=f"dense-dimension guard (default {MAX_DENSE_DEFAULT})")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qmarginal",
        description="Sound incompatibility checks for quantum marginal scenarios.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="test a product state against the order-n witness")
    p.add_argument("file")
    p.add_argument("--order", type=int, default=None, help="single order to test (default 1)")
    p.add_argument("--scan", type=int, default=None, help="scan orders 1..N instead of a single order")
    p.add_argument("--rate-samples", type=int, default=0, help="also print a sampled (heuristic) upper bound on the incompatibility rate")
    _add_common(p)
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("reproduce", help="print the reference worked-example values")
    _add_common(p)
    p.set_defaults(fn=cmd_reproduce)

    p = sub.add_parser("keyl", help="divergence and discrimination-ratio table for two states")
    p.add_argument("file")
    p.add_argument("--n-max", type=int, default=10, help="largest copy count in the table (default 10)")
    _add_common(p)
    p.set_defaults(fn=cmd_keyl)

    p = sub.add_parser("definetti", help="Monte-Carlo check of the witness integral identity")
    p.add_argument("file")
    p.add_argument("--n", type=int, default=1, help="tensor power (default 1)")
    p.add_argument("--samples", type=int, default=10000, help="sample count (default 10000)")
    _add_common(p)
    p.set_defaults(fn=cmd_definetti)

    p = sub.add_parser("ortho", help="orthogonal-count inequality test")
    p.add_argument("file")
    p.add_argument("--v", type=int, required=True, help="number of mutually orthogonal solutions hypothesized")
    p.add_argument("--order", type=int, default=1, help="tensor power (default 1)")
    _add_common(p)
    p.set_defaults(fn=cmd_ortho)

    p = sub.add_parser("bipartite", help="two disjoint marginals: spectra, rate, inequality table")
    p.add_argument("file")
    p.add_argument("--order", type=int, default=None, help="also check the dimension-sum inequality at this order")
    _add_common(p)
    p.set_defaults(fn=cmd_bipartite)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except GuardExceeded as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
