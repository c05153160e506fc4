"""Factor-tree data model: expansion, product evaluation, serialization.

A decomposition is an ordered left-to-right product of factors acting on
the first `level_qubits` positions of the register, padded with identity
on the trailing qubits, times one aggregated global phase. Recursion
strips the LAST qubit at every level, which is why a level-l SubUnitary
payload lives on l-1 qubits and a level-l LastQubit payload sits at
register position l.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional, Sequence, Tuple

import numpy as np

from .basis import build_kg_basis, pauli_word
from .errors import LevelExceedsRegisterError, ParseError
from .fileio import complex_entries, dump_json, entries_to_matrix, parse_json
from .linalg import expm_skew, kron

__all__ = [
    "FactorKind",
    "Factor",
    "DecompositionReport",
    "FactorTree",
    "expand",
    "product",
    "serialize",
    "deserialize",
    "make_tree",
    "factor_defects",
    "cartan_words",
]

_FORMAT_NAME = "kgdecomp-tree"
_FORMAT_VERSION = 1


class FactorKind(str, Enum):
    GLOBAL_PHASE = "global_phase"
    SUB_UNITARY = "sub_unitary"
    LAST_QUBIT = "last_qubit"
    CARTAN_EXP = "cartan_exp"


@dataclass(frozen=True)
class Factor:
    """One term of the factored product.

    Attributes:
        kind: which of the four factor shapes this is.
        level_qubits: recursion level l; SubUnitary payloads live on l-1
            qubits (l may be n_total+1 for a payload covering the whole
            register, the two-qubit base case), LastQubit payloads are
            2x2 at position l, CartanExp generators live on l qubits.
        matrix: payload for SubUnitary / LastQubit.
        phi: payload for GlobalPhase.
        basis_name: Cartan basis identifier ("H3", "F4") for CartanExp.
        coeffs: labeled real coefficients over that basis for CartanExp.
        subspace_residual: pre-repair distance of the raw optimizer
            output from the Cartan span; only Cartan factors carry one.
        order_index: position in the left-to-right product.
    """

    kind: FactorKind
    level_qubits: int = 1
    matrix: Optional[np.ndarray] = None
    phi: float = 0.0
    basis_name: Optional[str] = None
    coeffs: Optional[Tuple[Tuple[str, float], ...]] = None
    subspace_residual: Optional[float] = None
    order_index: int = -1


@dataclass(frozen=True)
class DecompositionReport:
    """Quality diagnostics attached to a factor tree.

    Attributes:
        approx_error: ||G - product||_F against the decomposed matrix.
        subspace_errors: (factor label, E_s) per Abelian factor, where
            E_s is the stacked-commutator metric of the raw element
            against its Cartan basis, before snap-to-span repair.
        wall_time: seconds spent in the decomposition.
        optimizer_stats: (stage label, iteration count) per optimizer run.
    """

    approx_error: float
    subspace_errors: Tuple[Tuple[str, float], ...] = ()
    wall_time: float = 0.0
    optimizer_stats: Tuple[Tuple[str, int], ...] = ()


@dataclass(frozen=True)
class FactorTree:
    """Ordered factors, aggregated global phase, and the quality report."""

    n_total: int
    phase: float
    factors: Tuple[Factor, ...]
    report: Optional[DecompositionReport] = None


def make_tree(
    n_total: int,
    phase: float,
    factors: Sequence[Factor],
    report: Optional[DecompositionReport] = None,
) -> FactorTree:
    """Stamps order_index on the factors and assembles the tree."""
    stamped = tuple(replace(f, order_index=i) for i, f in enumerate(factors))
    return FactorTree(n_total=n_total, phase=float(phase), factors=stamped, report=report)


def cartan_words(basis_name: str) -> Tuple:
    """Resolves a Cartan basis name like "H3" or "F4" to its word tuple."""
    family, level = basis_name[0], basis_name[1:]
    if family not in ("H", "F") or not level.isdigit() or int(level) < 2:
        raise ParseError(f"unknown Cartan basis {basis_name!r}", "basis")
    kg = build_kg_basis(int(level))
    return kg.h_set if family == "H" else kg.f_set


def _cartan_generator(factor: Factor) -> np.ndarray:
    valid = {w.label for w in cartan_words(factor.basis_name)}
    dim = 2**factor.level_qubits
    gen = np.zeros((dim, dim), dtype=complex)
    for label, coeff in factor.coeffs:
        if label not in valid:
            raise ParseError(
                f"label {label!r} is not in basis {factor.basis_name}", "coeffs"
            )
        gen = gen + float(coeff) * pauli_word(label).matrix
    return gen


def expand(factor: Factor, n_total: int) -> np.ndarray:
    """Expands one factor to the full 2^n_total register.

    GlobalPhase maps to exp(i phi) I; a level-l SubUnitary to
    payload (x) I^(n_total-l+1); a level-l LastQubit to
    I^(l-1) (x) payload (x) I^(n_total-l); a level-l CartanExp to
    expm_skew(sum_i c_i word_i) (x) I^(n_total-l).

    Raises:
        LevelExceedsRegisterError: if the factor does not fit.
    """
    dim = 2**n_total
    if factor.kind is FactorKind.GLOBAL_PHASE:
        return np.exp(1j * factor.phi) * np.eye(dim, dtype=complex)
    level = factor.level_qubits
    if factor.kind is FactorKind.SUB_UNITARY:
        pad = n_total - level + 1
        if pad < 0:
            raise LevelExceedsRegisterError(
                f"SubUnitary at level {level} does not fit {n_total} qubits"
            )
        return kron(factor.matrix, np.eye(2**pad, dtype=complex))
    if level > n_total:
        raise LevelExceedsRegisterError(
            f"{factor.kind.value} at level {level} does not fit {n_total} qubits"
        )
    if factor.kind is FactorKind.LAST_QUBIT:
        body = kron(np.eye(2 ** (level - 1), dtype=complex), factor.matrix)
        return kron(body, np.eye(2 ** (n_total - level), dtype=complex))
    body = expm_skew(_cartan_generator(factor))
    return kron(body, np.eye(2 ** (n_total - level), dtype=complex))


def product(tree: FactorTree) -> np.ndarray:
    """Left-to-right product of the expanded factors times the phase."""
    dim = 2**tree.n_total
    out = np.exp(1j * tree.phase) * np.eye(dim, dtype=complex)
    for factor in tree.factors:
        out = out @ expand(factor, tree.n_total)
    return out


def factor_defects(factor: Factor) -> dict:
    """Named invariant defects of one factor, for verification reports.

    Returns a dict with whichever of these apply: `unitarity` and `det`
    (payload factors), `bad_labels` count and `subspace_residual`
    (Cartan factors). All values are nonnegative; zero means clean.
    """
    defects = {}
    if factor.kind in (FactorKind.SUB_UNITARY, FactorKind.LAST_QUBIT):
        mat = np.asarray(factor.matrix, dtype=complex)
        eye = np.eye(mat.shape[0])
        defects["unitarity"] = float(np.linalg.norm(mat @ mat.conj().T - eye))
        defects["det"] = float(abs(np.linalg.det(mat) - 1.0))
    elif factor.kind is FactorKind.CARTAN_EXP:
        valid = {w.label for w in cartan_words(factor.basis_name)}
        defects["bad_labels"] = float(
            sum(1 for label, _ in factor.coeffs if label not in valid)
        )
        defects["subspace_residual"] = float(factor.subspace_residual or 0.0)
    return defects


def serialize(tree: FactorTree) -> str:
    """Renders a factor tree as its text document.

    The document round-trips through deserialize to a tree with the same
    product within 1e-14 (floats carry 17 significant digits).
    """
    records = []
    for factor in tree.factors:
        rec = {"kind": factor.kind.value, "level_qubits": factor.level_qubits}
        if factor.kind is FactorKind.GLOBAL_PHASE:
            rec["phi"] = float(factor.phi)
        elif factor.kind is FactorKind.CARTAN_EXP:
            rec["basis"] = factor.basis_name
            rec["coeffs"] = [[label, float(c)] for label, c in factor.coeffs]
            if factor.subspace_residual is not None:
                rec["subspace_residual"] = float(factor.subspace_residual)
        else:
            rec["entries"] = complex_entries(factor.matrix)
        records.append(rec)
    report = None
    if tree.report is not None:
        report = {
            "approx_error": tree.report.approx_error,
            "subspace_errors": [[label, v] for label, v in tree.report.subspace_errors],
            "wall_time": tree.report.wall_time,
            "optimizer_stats": [[label, int(v)] for label, v in tree.report.optimizer_stats],
        }
    doc = {
        "format": _FORMAT_NAME,
        "version": _FORMAT_VERSION,
        "n_total": tree.n_total,
        "phase": float(tree.phase),
        "report": report,
        "factors": records,
    }
    return dump_json(doc) + "\n"


def _parse_factor(rec, where: str) -> Factor:
    if not isinstance(rec, dict):
        raise ParseError("factor record must be an object", where)
    try:
        kind = FactorKind(rec["kind"])
    except (KeyError, ValueError):
        raise ParseError(f"missing or unknown factor kind {rec.get('kind')!r}", where)
    level = rec.get("level_qubits", 1)
    if not isinstance(level, int) or level < 1:
        raise ParseError(f"bad level_qubits {level!r}", where)
    if kind is FactorKind.GLOBAL_PHASE:
        phi = rec.get("phi")
        if not isinstance(phi, (int, float)):
            raise ParseError("global_phase record needs numeric 'phi'", where)
        return Factor(kind=kind, level_qubits=level, phi=float(phi))
    if kind is FactorKind.CARTAN_EXP:
        basis_name = rec.get("basis")
        coeffs = rec.get("coeffs")
        if not isinstance(basis_name, str) or not isinstance(coeffs, list):
            raise ParseError("cartan_exp record needs 'basis' and 'coeffs'", where)
        parsed = []
        for idx, pair in enumerate(coeffs):
            if (
                not isinstance(pair, list)
                or len(pair) != 2
                or not isinstance(pair[0], str)
                or not isinstance(pair[1], (int, float))
            ):
                raise ParseError("coefficient is not a [label, value] pair",
                                 f"{where}.coeffs[{idx}]")
            parsed.append((pair[0], float(pair[1])))
        residual = rec.get("subspace_residual")
        if residual is not None and not isinstance(residual, (int, float)):
            raise ParseError("subspace_residual must be numeric", where)
        return Factor(
            kind=kind,
            level_qubits=level,
            basis_name=basis_name,
            coeffs=tuple(parsed),
            subspace_residual=None if residual is None else float(residual),
        )
    dim = 2 ** (level - 1) if kind is FactorKind.SUB_UNITARY else 2
    matrix = entries_to_matrix(rec.get("entries", []), dim, f"{where}.entries")
    return Factor(kind=kind, level_qubits=level, matrix=matrix)


def deserialize(document: str) -> FactorTree:
    """Parses a factor-tree document back into a FactorTree.

    Raises:
        ParseError: with a location string, on any malformed content.
    """
    doc = parse_json(document)
    if not isinstance(doc, dict) or doc.get("format") != _FORMAT_NAME:
        raise ParseError(f"document is not a {_FORMAT_NAME} file", "top level")
    if doc.get("version") != _FORMAT_VERSION:
        raise ParseError(f"unsupported version {doc.get('version')!r}", "version")
    n_total = doc.get("n_total")
    phase = doc.get("phase")
    if not isinstance(n_total, int) or n_total < 1:
        raise ParseError(f"bad n_total {n_total!r}", "n_total")
    if not isinstance(phase, (int, float)):
        raise ParseError("phase must be numeric", "phase")
    records = doc.get("factors")
    if not isinstance(records, list):
        raise ParseError("'factors' must be a list", "factors")
    factors = [
        _parse_factor(rec, f"factors[{i}]") for i, rec in enumerate(records)
    ]
    report = None
    raw_report = doc.get("report")
    if raw_report is not None:
        if not isinstance(raw_report, dict) or not isinstance(
            raw_report.get("approx_error"), (int, float)
        ):
            raise ParseError("malformed report block", "report")
        try:
            report = DecompositionReport(
                approx_error=float(raw_report["approx_error"]),
                subspace_errors=tuple(
                    (str(label), float(v))
                    for label, v in raw_report.get("subspace_errors", [])
                ),
                wall_time=float(raw_report.get("wall_time", 0.0)),
                optimizer_stats=tuple(
                    (str(label), int(v))
                    for label, v in raw_report.get("optimizer_stats", [])
                ),
            )
        except (TypeError, ValueError):
            raise ParseError("malformed report block", "report")
    return make_tree(n_total, float(phase), factors, report)
