import json
from pathlib import Path

import numpy as np
import pytest

from biccert import algebra, bell, bic
from biccert.linalg import (
    BipartiteDims,
    frobenius,
    kron,
    matrix_from_json,
    maximally_entangled,
    random_unitary,
)

DATA_FILE = Path(__file__).resolve().parents[1] / "src/biccert/data/counterexample_rep.json"


# ---------------------------------------------------------------------------
# relation checks
# ---------------------------------------------------------------------------

def test_weyl_family_passes_all_variants(weyl_povm_d3):
    P = weyl_povm_d3.projections()
    S = bic.gram(weyl_povm_d3)
    for variant in ("standard", "cube", "bs"):
        report = algebra.check_as_relations(P, S, tol=1e-9, variant=variant)
        assert report.passed, (variant, report.max_residual)


def test_standard_and_cube_agree_on_failures(weyl_povm_d2):
    P = weyl_povm_d2.projections().copy()
    P[0] += 1e-3 * np.eye(2)
    S = bic.gram(weyl_povm_d2)
    standard = algebra.check_as_relations(P, S, tol=1e-9, variant="standard")
    cube = algebra.check_as_relations(P, S, tol=1e-9, variant="cube")
    assert not standard.passed and not cube.passed


def test_random_projections_fail_gram_relation(weyl_povm_d2):
    S = bic.gram(weyl_povm_d2)
    P = np.stack([np.diag([1.0, 0.0]).astype(complex) for _ in range(4)])
    report = algebra.check_as_relations(P, S, tol=1e-9, variant="standard")
    assert not report.passed
    assert report.gram.max() > 0.1


def test_bs_variant_full_enumeration_d2(weyl_povm_d2):
    P = weyl_povm_d2.projections()
    S = bic.gram(weyl_povm_d2)
    report = algebra.check_as_relations(P, S, tol=1e-9, variant="bs")
    assert report.passed
    assert len(report.bs_commutators) == 4**4


def test_bs_variant_separates_exceptional_family(sic3_povm):
    # the 6-dimensional family satisfies the base relations but not the
    # extra commutator relations; a true 3-dimensional family satisfies both
    X = algebra.counterexample_rep()
    S = algebra.counterexample_gram()
    assert algebra.check_as_relations(X, S, tol=1e-9, variant="standard").passed
    assert not algebra.check_as_relations(X, S, tol=1e-9, variant="bs").passed
    P = sic3_povm.projections()
    assert algebra.check_as_relations(P, S, tol=1e-9, variant="bs").passed


def test_check_as_relations_size_mismatch(weyl_povm_d2):
    S = bic.gram(weyl_povm_d2)
    with pytest.raises(ValueError):
        algebra.check_as_relations(np.zeros((3, 2, 2)), S)


# ---------------------------------------------------------------------------
# the exceptional 6x6 family
# ---------------------------------------------------------------------------

def test_counterexample_published_relations():
    X = algebra.counterexample_rep()
    assert X.shape == (9, 6, 6)
    assert frobenius(X.sum(axis=0) - 3 * np.eye(6)) < 1e-10
    for j in range(9):
        assert frobenius(X[j] @ X[j] - X[j]) < 1e-10
        assert abs(np.trace(X[j]).real - 2.0) < 1e-12  # dim/d = 6/3
        for k in range(9):
            if j != k:
                assert frobenius(X[j] @ X[k] @ X[j] - 0.25 * X[j]) < 1e-10


def test_counterexample_span_dimension():
    X = algebra.counterexample_rep()
    products = [X[j] @ X[k] for j in range(9) for k in range(9)]
    assert algebra.span_dimension(products) == 25


def test_counterexample_irreducible():
    dec = algebra.irrep_decompose(algebra.counterexample_rep())
    assert dec.shape_multiset == ((1, 6),)
    assert dec.off_block_residual < 1e-8


def test_counterexample_data_file_matches():
    payload = json.loads(DATA_FILE.read_text())
    assert payload["d"] == 3
    shipped = np.stack([matrix_from_json(m) for m in payload["matrices"]])
    assert np.array_equal(shipped, algebra.counterexample_rep())


def test_span_dimension_basics(weyl_povm_d3):
    assert algebra.span_dimension([np.eye(4)]) == 1
    P = weyl_povm_d3.projections()
    products = [P[j] @ P[k] for j in range(9) for k in range(9)]
    assert algebra.span_dimension(products) == 9  # spanning family fills M_3


# ---------------------------------------------------------------------------
# local supports and compressions
# ---------------------------------------------------------------------------

def test_local_support_full_rank():
    phi = maximally_entangled(3)
    rho = np.outer(phi, phi.conj())
    sup = algebra.local_support(rho, BipartiteDims(3, 3), "A")
    assert sup.support_dim == 3


def test_local_support_product_basis_state():
    rho = np.zeros((4, 4), dtype=complex)
    rho[0, 0] = 1.0  # |00><00|
    for side in ("A", "B"):
        sup = algebra.local_support(rho, BipartiteDims(2, 2), side)
        assert sup.support_dim == 1


def test_local_support_projector_fixes_state():
    rng = np.random.default_rng(3)
    G = rng.standard_normal((6, 2)) + 1j * rng.standard_normal((6, 2))
    rho = G @ G.conj().T
    rho /= np.trace(rho).real
    supA = algebra.local_support(rho, BipartiteDims(2, 3), "A")
    supB = algebra.local_support(rho, BipartiteDims(2, 3), "B")
    assert frobenius(kron(supA.projector(), np.eye(3)) @ rho - rho) < 1e-9
    assert frobenius(kron(np.eye(2), supB.projector()) @ rho - rho) < 1e-9


def test_compress_identity_cases():
    phi = maximally_entangled(2)
    rho = np.outer(phi, phi.conj())
    sup = algebra.local_support(rho, BipartiteDims(2, 2), "A")
    assert np.allclose(algebra.compress(np.eye(2), sup), np.eye(2), atol=1e-12)
    X = np.array([[1.0, 2j], [-2j, 0.0]])
    hat = algebra.compress(X, sup)
    # full support: compression is a unitary change of basis
    assert np.allclose(np.sort(np.linalg.eigvalsh(hat)), np.sort(np.linalg.eigvalsh(X)))
    with pytest.raises(ValueError):
        algebra.compress(np.eye(3), sup)


def test_compressed_reference_bob_passes_relations(reference_d2):
    ref, S = reference_d2
    sup = algebra.local_support(ref.rho, ref.dims, "B")
    B_hat = np.stack([algebra.compress(B, sup) for B in ref.bob])
    assert algebra.check_as_relations(B_hat, S, tol=1e-9).passed


# ---------------------------------------------------------------------------
# irreducible decomposition
# ---------------------------------------------------------------------------

def test_irrep_single_bic_family(weyl_povm_d3):
    dec = algebra.irrep_decompose(weyl_povm_d3.projections())
    assert dec.shape_multiset == ((1, 3),)


def test_irrep_inflated_family(weyl_povm_d2):
    P = weyl_povm_d2.projections()
    inflated = np.stack([np.kron(np.eye(2), Pj) for Pj in P])
    dec = algebra.irrep_decompose(inflated)
    assert dec.shape_multiset == ((2, 2),)
    blk = dec.blocks[0]
    assert blk.generators.shape == (4, 2, 2)
    # conjugated generators match the block model exactly
    Q = dec.basis_change
    for j, Xj in enumerate(inflated):
        model = dec.block_matrix([b.generators[j] for b in dec.blocks])
        assert frobenius(Q.conj().T @ Xj @ Q - model) < 1e-8


def test_irrep_mixed_inequivalent_blocks(sic3_povm):
    X6 = algebra.counterexample_rep()
    P3 = sic3_povm.projections()
    mixed = np.stack(
        [
            np.block([[P3[j], np.zeros((3, 6))], [np.zeros((6, 3)), X6[j]]])
            for j in range(9)
        ]
    )
    dec = algebra.irrep_decompose(mixed)
    assert dec.shape_multiset == ((1, 3), (1, 6))


def test_irrep_trace_law_and_divisibility(sic3_povm, weyl_povm_d2):
    X6 = algebra.counterexample_rep()
    families = [
        (3, sic3_povm.projections()),
        (3, X6),
        (2, weyl_povm_d2.projections()),
    ]
    for d, X in families:
        dec = algebra.irrep_decompose(X)
        for blk in dec.blocks:
            assert blk.dimension % d == 0
            for G in blk.generators:
                assert abs(np.trace(G).real - blk.dimension / d) < 1e-8


def test_irrep_basis_covariance(weyl_povm_d2):
    P = weyl_povm_d2.projections()
    inflated = np.stack([np.kron(np.eye(2), Pj) for Pj in P])
    baseline = algebra.irrep_decompose(inflated).shape_multiset
    rng = np.random.default_rng(12)
    for seed in range(3):
        U = random_unitary(4, rng)
        conjugated = np.stack([U @ Xj @ U.conj().T for Xj in inflated])
        assert algebra.irrep_decompose(conjugated, seed=seed).shape_multiset == baseline


def test_irrep_rejects_nonhermitian():
    bad = np.zeros((1, 2, 2), dtype=complex)
    bad[0, 0, 1] = 1.0
    with pytest.raises(ValueError):
        algebra.irrep_decompose(bad)


# ---------------------------------------------------------------------------
# block-maximally-entangled decomposition
# ---------------------------------------------------------------------------

def test_maxent_reference_single_block(reference_d2, reference_d3):
    for ref, _ in (reference_d2, reference_d3):
        d = ref.dims.dA
        report = algebra.maxent_decompose(
            ref.rho, np.stack([B.T for B in ref.bob]), ref.bob, ref.dims
        )
        assert len(report.blocks) == 1
        blk = report.blocks[0]
        assert (blk.alice_multiplicity, blk.bob_multiplicity, blk.dimension) == (1, 1, d)
        assert report.max_state_residual < 1e-9
        assert report.ef_transpose_residual < 1e-8


def test_maxent_remark_mixture_separates_e_from_f():
    E1 = np.diag([1.0, 1.0, 0.0]).astype(complex)
    F1 = np.diag([1.0, 0.0, 0.0]).astype(complex)
    psi1 = np.zeros(9, dtype=complex)
    psi1[0] = psi1[7] = 1 / np.sqrt(2)  # (|00> + |21>)/sqrt(2)
    psi2 = np.zeros(9, dtype=complex)
    psi2[3] = psi2[8] = 1 / np.sqrt(2)  # (|10> + |22>)/sqrt(2)
    rho = 0.5 * (np.outer(psi1, psi1.conj()) + np.outer(psi2, psi2.conj()))
    report = algebra.maxent_decompose(rho, [E1], [F1], BipartiteDims(3, 3))
    assert all(b.dimension == 1 for b in report.blocks)
    assert report.max_state_residual < 1e-9
    # the decomposition succeeds, yet compressed E differs from compressed F^t
    assert report.ef_transpose_residual > 1e-2
    multiplicities = sorted(
        (b.alice_multiplicity, b.bob_multiplicity) for b in report.blocks
    )
    assert multiplicities == [(1, 2), (2, 1)]


def test_maxent_scalar_sync_product_state():
    sigma = np.diag([0.7, 0.3]).astype(complex)
    tau = np.diag([0.5, 0.5]).astype(complex)
    rho = kron(sigma, tau)
    E = [0.4 * np.eye(2, dtype=complex)]
    F = [0.4 * np.eye(2, dtype=complex)]
    report = algebra.maxent_decompose(rho, E, F, BipartiteDims(2, 2))
    assert all(b.dimension == 1 for b in report.blocks)


def test_maxent_pure_state_equal_multiplicities(weyl_povm_d2, sic3_povm):
    # direct sum of two equivalent copies: one block with e = f = 2 and
    # compressed E equal to compressed F transposed (purity case)
    P = weyl_povm_d2.projections()
    U = random_unitary(2, np.random.default_rng(9))
    F = np.stack(
        [
            np.block(
                [[P[j], np.zeros((2, 2))], [np.zeros((2, 2)), U @ P[j] @ U.conj().T]]
            )
            for j in range(4)
        ]
    )
    E = np.stack([Fj.T for Fj in F])
    G = np.diag([np.sqrt(1.2)] * 2 + [np.sqrt(0.8)] * 2).astype(complex)
    psi = kron(G, np.eye(4)) @ maximally_entangled(4)
    psi /= np.linalg.norm(psi)
    rho = np.outer(psi, psi.conj())
    report = algebra.maxent_decompose(rho, E, F, BipartiteDims(4, 4))
    assert [
        (b.alice_multiplicity, b.bob_multiplicity, b.dimension) for b in report.blocks
    ] == [(2, 2, 2)]
    assert report.max_state_residual < 1e-8
    assert report.ef_transpose_residual < 1e-8

    # direct sum of two inequivalent blocks (dimensions 3 and 6, same S)
    X6 = algebra.counterexample_rep()
    P3 = sic3_povm.projections()
    F2 = np.stack(
        [
            np.block([[P3[j], np.zeros((3, 6))], [np.zeros((6, 3)), X6[j]]])
            for j in range(9)
        ]
    )
    E2 = np.stack([Fj.T for Fj in F2])
    G2 = np.diag([np.sqrt(1.2)] * 3 + [np.sqrt(0.8)] * 6).astype(complex)
    psi2 = kron(G2, np.eye(9)) @ maximally_entangled(9)
    psi2 /= np.linalg.norm(psi2)
    rho2 = np.outer(psi2, psi2.conj())
    report2 = algebra.maxent_decompose(rho2, E2, F2, BipartiteDims(9, 9))
    assert [
        (b.alice_multiplicity, b.bob_multiplicity, b.dimension)
        for b in report2.blocks
    ] == [(1, 1, 3), (1, 1, 6)]
    assert report2.max_state_residual < 1e-8
    assert report2.ef_transpose_residual < 1e-8


def test_maxent_sync_precondition():
    rho = np.eye(4, dtype=complex) / 4
    E = [np.diag([1.0, 0.0]).astype(complex)]
    F = [np.diag([0.0, 1.0]).astype(complex)]
    with pytest.raises(ValueError, match="sync"):
        algebra.maxent_decompose(rho, E, F, BipartiteDims(2, 2))


# ---------------------------------------------------------------------------
# full certification audit
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("fixture", ["reference_d2", "reference_d3", "reference_d4"])
def test_certification_reference(fixture, request):
    ref, S = request.getfixturevalue(fixture)
    cert = algebra.verify_certification(ref, S, tol=1e-9)
    assert cert.optimal
    assert cert.passed
    assert cert.max_residual <= 1e-9
    assert cert.povm_c_residual <= 1e-9
    assert cert.c_relations.passed


def test_certification_depolarized_is_advisory(reference_d2):
    ref, S = reference_d2
    cert = algebra.verify_certification(bell.depolarize(ref, 0.9), S)
    assert cert.advisory and not cert.optimal and not cert.passed
    assert cert.bell_value < 4.0


def test_dual_operators_reduce_to_bob_transpose(reference_d3):
    ref, S = reference_d3
    C = algebra.dual_alice_operators(ref, S)
    for j in range(9):
        assert frobenius(C[j] - ref.bob[j].T) < 1e-10
