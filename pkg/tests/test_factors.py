"""Factor model tests: expansion oracles, products, serialization."""

import numpy as np
import pytest

from kgdecomp import (
    Factor,
    FactorKind,
    FactorTree,
    DecompositionReport,
    LevelExceedsRegisterError,
    ParseError,
    deserialize,
    expand,
    expm_skew,
    factor_defects,
    haar_special_unitary,
    make_tree,
    pauli_word,
    product,
    serialize,
)
from kgdecomp.factors import cartan_words


def su(n_qubits, seed):
    return haar_special_unitary(n_qubits, np.random.default_rng(seed))


def test_expand_global_phase():
    f = Factor(kind=FactorKind.GLOBAL_PHASE, phi=np.pi / 2)
    assert np.allclose(expand(f, 2), 1j * np.eye(4), atol=1e-15)


def test_expand_sub_unitary_pads_right():
    u = su(2, 0)
    f = Factor(kind=FactorKind.SUB_UNITARY, level_qubits=3, matrix=u)
    assert np.allclose(expand(f, 3), np.kron(u, np.eye(2)), atol=0)
    # at level n_total + 1 the payload covers the whole register
    f_leaf = Factor(kind=FactorKind.SUB_UNITARY, level_qubits=3, matrix=u)
    assert np.allclose(expand(f_leaf, 2), u, atol=0)


def test_expand_last_qubit_embeds_in_middle():
    u = su(1, 1)
    f = Factor(kind=FactorKind.LAST_QUBIT, level_qubits=2, matrix=u)
    want = np.kron(np.kron(np.eye(2), u), np.eye(2))
    assert np.allclose(expand(f, 3), want, atol=0)


def test_expand_last_qubit_at_register_end():
    u = su(1, 2)
    f = Factor(kind=FactorKind.LAST_QUBIT, level_qubits=3, matrix=u)
    assert np.allclose(expand(f, 3), np.kron(np.eye(4), u), atol=0)


def test_expand_cartan_exp_oracle():
    # exp of 0.3 XXZ + 0.1 ZZZ on the first 3 qubits of a 4-qubit register
    coeffs = (("XXZ", 0.3), ("ZZZ", 0.1))
    f = Factor(kind=FactorKind.CARTAN_EXP, level_qubits=3, basis_name="F3",
               coeffs=coeffs)
    gen = 0.3 * pauli_word("XXZ").matrix + 0.1 * pauli_word("ZZZ").matrix
    want = np.kron(expm_skew(gen), np.eye(2))
    assert np.allclose(expand(f, 4), want, atol=1e-14)


def test_expand_rejects_oversized_level():
    u = su(2, 3)
    f = Factor(kind=FactorKind.SUB_UNITARY, level_qubits=6, matrix=u)
    with pytest.raises(LevelExceedsRegisterError):
        expand(f, 3)


def test_product_phase_cancellation():
    tree = make_tree(
        2, np.pi, [Factor(kind=FactorKind.GLOBAL_PHASE, phi=np.pi)]
    )
    assert np.allclose(product(tree), np.eye(4), atol=1e-15)


def test_make_tree_stamps_order():
    factors = [Factor(kind=FactorKind.GLOBAL_PHASE, phi=0.1) for _ in range(3)]
    tree = make_tree(2, 0.0, factors)
    assert [f.order_index for f in tree.factors] == [0, 1, 2]


def test_cartan_words_lookup():
    assert [w.label for w in cartan_words("H3")] == ["IIX", "XXX", "YYX", "ZZX"]
    assert [w.label for w in cartan_words("F4")] == [
        "IIXZ", "XXIZ", "XXXZ", "YYIZ", "YYXZ", "ZZIZ", "ZZXZ"
    ]
    with pytest.raises(ParseError):
        cartan_words("Q3")


def test_serialize_round_trip_preserves_product_and_coords():
    factors = [
        Factor(kind=FactorKind.SUB_UNITARY, level_qubits=3, matrix=su(2, 4)),
        Factor(kind=FactorKind.CARTAN_EXP, level_qubits=3, basis_name="H3",
               coeffs=(("IIX", 0.125), ("XXX", -1.75e-3), ("YYX", 0.0),
                       ("ZZX", 1.0 / 3.0)),
               subspace_residual=2.5e-14),
        Factor(kind=FactorKind.LAST_QUBIT, level_qubits=3, matrix=su(1, 5)),
        Factor(kind=FactorKind.GLOBAL_PHASE, phi=-0.25),
    ]
    report = DecompositionReport(
        approx_error=1.25e-13,
        subspace_errors=(("h[H3]", 3e-15),),
        wall_time=0.5,
        optimizer_stats=(("n3:h", 17),),
    )
    tree = make_tree(3, 0.75, factors, report)
    again = deserialize(serialize(tree))
    assert again.n_total == tree.n_total
    assert again.phase == tree.phase
    assert len(again.factors) == len(tree.factors)
    # 17-significant-digit floats round-trip doubles exactly
    assert again.factors[1].coeffs == tree.factors[1].coeffs
    assert again.report.approx_error == report.approx_error
    assert again.report.subspace_errors == report.subspace_errors
    assert np.linalg.norm(product(again) - product(tree)) < 1e-14


def test_deserialize_rejects_malformed_documents():
    good = serialize(make_tree(2, 0.0, [
        Factor(kind=FactorKind.SUB_UNITARY, level_qubits=3, matrix=su(2, 6))
    ]))

    with pytest.raises(ParseError):
        deserialize(good[:-20])
    with pytest.raises(ParseError):
        deserialize(good.replace("kgdecomp-tree", "other-format"))
    with pytest.raises(ParseError):
        deserialize(good.replace('"version": 1', '"version": 99'))
    with pytest.raises(ParseError):
        deserialize(good.replace("sub_unitary", "mystery_kind"))
    err = None
    try:
        deserialize(good.replace("sub_unitary", "mystery_kind"))
    except ParseError as exc:
        err = exc
    assert err is not None and err.location


def test_deserialize_rejects_wrong_entry_count():
    tree = make_tree(2, 0.0, [
        Factor(kind=FactorKind.SUB_UNITARY, level_qubits=3, matrix=su(2, 7))
    ])
    doc = serialize(tree)
    # drop one entry pair from the matrix payload
    head, sep, tail = doc.partition('"entries": [')
    depth = 1
    idx = 0
    while depth:
        if tail[idx] == "[":
            depth += 1
        elif tail[idx] == "]":
            depth -= 1
        idx += 1
    inner = tail[: idx - 1]
    trimmed = inner[: inner.rfind("[") - 2]
    with pytest.raises(ParseError):
        deserialize(head + sep + trimmed + tail[idx - 1:])


def test_factor_defects_clean_and_dirty():
    clean = Factor(kind=FactorKind.SUB_UNITARY, level_qubits=3, matrix=su(2, 8))
    d = factor_defects(clean)
    assert d["unitarity"] < 1e-13 and d["det"] < 1e-13

    dirty = Factor(kind=FactorKind.SUB_UNITARY, level_qubits=3,
                   matrix=1.5 * su(2, 9))
    assert factor_defects(dirty)["unitarity"] > 1.0

    cartan = Factor(kind=FactorKind.CARTAN_EXP, level_qubits=3,
                    basis_name="H3", coeffs=(("QQX", 1.0),),
                    subspace_residual=1e-3)
    d = factor_defects(cartan)
    assert d["bad_labels"] == 1.0
    assert d["subspace_residual"] == 1e-3


def test_tree_is_frozen():
    tree = make_tree(2, 0.0, [
        Factor(kind=FactorKind.SUB_UNITARY, level_qubits=3, matrix=su(2, 10))
    ])
    with pytest.raises(Exception):
        tree.phase = 1.0
