"""Command-line interface.

Subcommands:
    decompose    factor a matrix file into a factor-tree file
    verify       recheck a tree against its source matrix
    bench        Haar-random benchmark at fixed qubit count
    compare-bch  involution split vs truncated-BCH split on one input
    basis        dump the recursive basis label sets

Exit codes: 0 success, 1 verification or generic failure, 2 unreadable
or malformed input, 3 input not special unitary (and --repair not
given), 4 optimizer or root search did not converge.
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

import numpy as np

from .basis import build_kg_basis
from .bch import BchConfig, solve_bch_split
from .config import DEFAULT_TOLS, Tolerances
from .engine import (
    OptimizerConfig,
    compute_m,
    decompose_full,
    residual_k,
)
from .errors import (
    DimensionMismatchError,
    KgDecompError,
    NotUnitaryError,
    OptimizerFailedError,
    ParseError,
    RootSearchFailedError,
    SubspaceViolationError,
)
from .factors import deserialize, factor_defects, product, serialize
from .fileio import dump_json, matrix_from_document
from .involutions import AxisInvolution
from .linalg import expm_skew, nearest_special_unitary
from .metrics import format_table, run_benchmark, summary_to_dict

__all__ = [
    "main",
    "entrypoint",
    "cmd_decompose",
    "cmd_verify",
    "cmd_bench",
    "cmd_compare_bch",
    "cmd_basis",
]

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_PARSE = 2
EXIT_NOT_SU = 3
EXIT_NO_CONVERGENCE = 4


def _read_text(path: str) -> str:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return handle.read()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}", location=path)


def _load_matrix(path: str):
    n, matrix = matrix_from_document(_read_text(path))
    return n, matrix


def _check_su(matrix: np.ndarray) -> float:
    dim = matrix.shape[0]
    defect = float(np.linalg.norm(matrix @ matrix.conj().T - np.eye(dim)))
    det_defect = float(abs(np.linalg.det(matrix) - 1.0))
    return max(defect, det_defect)


def _optimizer_config(args) -> OptimizerConfig:
    return OptimizerConfig(
        max_iters=args.max_iters,
        restarts=args.restarts,
        seed=args.seed,
    )


def _tolerances(args) -> Tolerances:
    kwargs = {}
    if getattr(args, "tol_subspace", None) is not None:
        kwargs["subspace"] = args.tol_subspace
    if getattr(args, "tol_reconstruct", None) is not None:
        kwargs["reconstruct"] = args.tol_reconstruct
    if not kwargs:
        return DEFAULT_TOLS
    return Tolerances(
        structure=DEFAULT_TOLS.structure,
        reconstruct=kwargs.get("reconstruct", DEFAULT_TOLS.reconstruct),
        cartan=DEFAULT_TOLS.cartan,
        subspace=kwargs.get("subspace", DEFAULT_TOLS.subspace),
        pattern=DEFAULT_TOLS.pattern,
    )


def cmd_decompose(args) -> int:
    n, g_raw = _load_matrix(args.input)
    su_defect = _check_su(g_raw)
    g = g_raw
    repair_distance = None
    if su_defect > args.ingest_tol:
        if not args.repair:
            print(
                f"input is not special unitary (defect {su_defect:.3e} > "
                f"{args.ingest_tol:.3e}); rerun with --repair to project it",
                file=sys.stderr,
            )
            return EXIT_NOT_SU
        g, _ = nearest_special_unitary(g_raw)
        repair_distance = float(np.linalg.norm(g - g_raw))

    tree = decompose_full(g, n, _optimizer_config(args), _tolerances(args),
                          threads=args.threads)
    document = serialize(tree)
    report = tree.report

    summary_stream = sys.stdout
    if args.output:
        with open(args.output, "w", encoding="utf-8") as handle:
            handle.write(document + "\n")
    else:
        print(document)
        summary_stream = sys.stderr

    print(f"n = {n}, factors = {len(tree.factors)}", file=summary_stream)
    print(f"E_a = {report.approx_error:.6e}", file=summary_stream)
    for label, value in report.subspace_errors:
        print(f"E_s {label} = {value:.6e}", file=summary_stream)
    if repair_distance is not None:
        print(f"repair distance = {repair_distance:.6e}", file=summary_stream)
        raw_error = float(np.linalg.norm(g_raw - product(tree)))
        print(f"E_a vs raw input = {raw_error:.6e}", file=summary_stream)
    print(f"wall time = {report.wall_time:.3f} s", file=summary_stream)
    if args.output:
        print(f"wrote {args.output}", file=summary_stream)
    return EXIT_OK


def cmd_verify(args) -> int:
    n, g = _load_matrix(args.matrix)
    tree = deserialize(_read_text(args.tree))
    if tree.n_total != n:
        raise DimensionMismatchError(
            f"tree is for n = {tree.n_total}, matrix file has n = {n}"
        )
    tols = _tolerances(args)
    threshold = tols.reconstruct * max(tree.n_total - 2, 1)
    error = float(np.linalg.norm(g - product(tree)))
    print(f"E_a = {error:.6e} (threshold {threshold:.6e})")

    worst_defect = 0.0
    for index, factor in enumerate(tree.factors):
        for name, value in factor_defects(factor).items():
            if name in ("unitarity", "det") and value > DEFAULT_TOLS.structure * 2**n:
                print(f"factor {index}: {name} defect {value:.3e}")
                worst_defect = max(worst_defect, value)
            if name == "bad_labels" and value > 0:
                print(f"factor {index}: {int(value)} unknown Cartan labels")
                worst_defect = max(worst_defect, value)

    if error <= threshold and worst_defect == 0.0:
        print("VERIFY OK")
        return EXIT_OK
    print("VERIFY FAIL")
    return EXIT_FAIL


def cmd_bench(args) -> int:
    summary = run_benchmark(
        n=args.n,
        count=args.count,
        cfg=_optimizer_config(args),
        seed=args.seed,
        threads=args.threads,
    )
    if args.json:
        print(dump_json(summary_to_dict(summary)))
    else:
        print(format_table([summary]))
    if summary.failures > 0:
        return EXIT_NO_CONVERGENCE
    return EXIT_OK


def cmd_compare_bch(args) -> int:
    n, g = _load_matrix(args.input)
    su_defect = _check_su(g)
    if su_defect > args.ingest_tol:
        print(
            f"input is not special unitary (defect {su_defect:.3e})",
            file=sys.stderr,
        )
        return EXIT_NOT_SU
    if n < 2:
        raise DimensionMismatchError("comparison needs n >= 2")

    kg = build_kg_basis(n)
    inv = AxisInvolution(n, "Z")
    m_inv = compute_m(g, inv, kg.m_set)
    k0 = residual_k(g, m_inv)
    inv_error = float(np.linalg.norm(g - k0 @ expm_skew(m_inv.matrix)))
    m_norm = float(np.linalg.norm(m_inv.matrix))
    print(f"involution: reconstruction = {inv_error:.6e}, |m| = {m_norm:.6e}")

    if m_norm > args.max_norm:
        print(
            f"|m| = {m_norm:.3e} exceeds --max-norm {args.max_norm:.3e}; "
            "the truncated series is not meaningful there",
            file=sys.stderr,
        )
        return EXIT_NO_CONVERGENCE

    cfg = BchConfig(truncation_order=args.order)
    k_elt, m_elt, residual = solve_bch_split(g, kg.k_set, kg.m_set, cfg)
    gap = float(
        np.linalg.norm(np.asarray(m_elt.coords) - np.asarray(m_inv.coords))
    )
    print(
        f"bch[order={args.order}]: reconstruction = {residual:.6e}, "
        f"m-coordinate gap = {gap:.6e}, k off-span = {k_elt.residual_norm:.6e}"
    )
    return EXIT_OK


def cmd_basis(args) -> int:
    kg = build_kg_basis(args.n)
    sets = (
        ("M", kg.m_set),
        ("K", kg.k_set),
        ("K0", kg.k0_set),
        ("K1", kg.k1_set),
        ("H", kg.h_set),
        ("F", kg.f_set),
    )
    wanted = None if args.set == "all" else args.set
    for name, words in sets:
        if wanted is not None and name != wanted:
            continue
        for word in words:
            print(f"{name} {word.label}")
    return EXIT_OK


def _add_optimizer_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--restarts", type=int, default=4,
                     help="random restarts after the zero start (default 4)")
    sub.add_argument("--max-iters", type=int, default=200,
                     help="BFGS iteration cap per start (default 200)")
    sub.add_argument("--seed", type=int, default=0,
                     help="seed for restarts and sampling (default 0)")
    sub.add_argument("--threads", type=int, default=1,
                     help="worker threads (default 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kgdecomp",
        description="Recursive Cartan factorization of special unitaries.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    p_dec = subparsers.add_parser(
        "decompose", help="factor a matrix file into a factor tree"
    )
    p_dec.add_argument("input", help="matrix document (JSON with n, entries)")
    p_dec.add_argument("-o", "--output",
                       help="tree output path (default: stdout)")
    p_dec.add_argument("--repair", action="store_true",
                       help="project a non-unitary input to the nearest "
                            "special unitary before decomposing")
    p_dec.add_argument("--ingest-tol", type=float, default=1e-8,
                       help="acceptable input SU defect (default 1e-8)")
    p_dec.add_argument("--tol-subspace", type=float, default=None,
                       help="subspace residual bound (default 1e-3)")
    p_dec.add_argument("--tol-reconstruct", type=float, default=None,
                       help="reconstruction bound used in reporting "
                            "(default 1e-9)")
    _add_optimizer_flags(p_dec)
    p_dec.set_defaults(func=cmd_decompose)

    p_ver = subparsers.add_parser(
        "verify", help="recheck a factor tree against its source matrix"
    )
    p_ver.add_argument("matrix", help="matrix document")
    p_ver.add_argument("tree", help="factor tree document")
    p_ver.add_argument("--tol-reconstruct", type=float, default=None,
                       help="per-level reconstruction bound (default 1e-9)")
    p_ver.set_defaults(func=cmd_verify)

    p_bench = subparsers.add_parser(
        "bench", help="decompose Haar-random samples and aggregate errors"
    )
    p_bench.add_argument("--n", type=int, required=True, help="qubit count")
    p_bench.add_argument("--count", type=int, required=True,
                         help="number of samples")
    p_bench.add_argument("--json", action="store_true",
                         help="emit the summary as JSON instead of a table")
    _add_optimizer_flags(p_bench)
    p_bench.set_defaults(func=cmd_bench)

    p_cmp = subparsers.add_parser(
        "compare-bch",
        help="compare the involution split against the truncated-BCH split",
    )
    p_cmp.add_argument("input", help="matrix document")
    p_cmp.add_argument("--order", type=int, default=6,
                       help="BCH truncation order, at most 8 (default 6)")
    p_cmp.add_argument("--max-norm", type=float, default=0.5,
                       help="refuse inputs whose m-norm exceeds this "
                            "(default 0.5)")
    p_cmp.add_argument("--ingest-tol", type=float, default=1e-8,
                       help="acceptable input SU defect (default 1e-8)")
    p_cmp.set_defaults(func=cmd_compare_bch)

    p_basis = subparsers.add_parser(
        "basis", help="print the recursive basis label sets"
    )
    p_basis.add_argument("--n", type=int, required=True, help="qubit count")
    p_basis.add_argument("--set", default="all",
                         choices=["all", "M", "K", "K0", "K1", "H", "F"],
                         help="restrict to one label set")
    p_basis.set_defaults(func=cmd_basis)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        where = f" [{exc.location}]" if exc.location else ""
        print(f"parse error{where}: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except DimensionMismatchError as exc:
        print(f"dimension mismatch: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except NotUnitaryError as exc:
        print(f"input is not special unitary: {exc}", file=sys.stderr)
        return EXIT_NOT_SU
    except (OptimizerFailedError, RootSearchFailedError,
            SubspaceViolationError) as exc:
        print(f"no convergence: {exc}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    except KgDecompError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
