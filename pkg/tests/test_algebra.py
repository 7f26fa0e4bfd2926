import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st

from gcsloc.algebra import (
    algebra_from_generators,
    build_su2_irrep,
    build_sun_fundamental,
    compute_structure_constants,
    killing_normalized,
    rep_debug_dict,
    rescaled,
)

PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def levi_civita():
    eps = np.zeros((3, 3, 3))
    for i, j, k in [(0, 1, 2), (1, 2, 0), (2, 0, 1)]:
        eps[i, j, k] = 1.0
        eps[j, i, k] = -1.0
    return eps


@pytest.mark.parametrize("two_j", [1, 2, 3, 4, 5, 6])
def test_su2_invariants(two_j):
    rep = build_su2_irrep(two_j)
    j = two_j / 2.0
    assert rep.dim_algebra == 3
    assert rep.dim_hilbert == two_j + 1

    # trace norm: tr(J_z^2) = sum of m^2 over the ladder
    m = np.arange(-two_j, two_j + 1, 2) / 2.0
    lam = float(np.sum(m * m))
    assert rep.normalization == pytest.approx(lam, rel=1e-13)
    assert rep.normalization == pytest.approx(j * (j + 1) * (2 * j + 1) / 3.0, rel=1e-13)

    assert rep.casimir_eigenvalue == pytest.approx(j * (j + 1), rel=1e-13)
    assert rep.adjoint_casimir == pytest.approx(2.0, rel=1e-12)
    assert np.max(np.abs(rep.structure_constants - levi_civita())) < 1e-12
    assert np.max(np.abs(rep.gram - lam * np.eye(3))) < 1e-10 * lam


def test_su2_matrices_spin_half():
    rep = build_su2_irrep(1)
    for k, axis in enumerate("xyz"):
        assert np.allclose(rep.generators[k], PAULI[axis] / 2.0, atol=1e-15)


def test_su2_jz_ladder_order():
    rep = build_su2_irrep(4)
    assert np.allclose(np.diag(rep.generators[2]), [2, 1, 0, -1, -2])


def test_sun_fundamental_pauli_agreement():
    rep = build_sun_fundamental(2)
    for k, axis in enumerate("xyz"):
        assert np.allclose(rep.generators[k], PAULI[axis] / 2.0, atol=1e-15)
    assert rep.casimir_eigenvalue == pytest.approx(0.75, rel=1e-13)


def test_sun3_gellmann_values():
    rep = build_sun_fundamental(3)
    assert rep.dim_algebra == 8
    assert rep.normalization == pytest.approx(0.5, rel=1e-13)
    assert rep.casimir_eigenvalue == pytest.approx(4.0 / 3.0, rel=1e-13)
    assert rep.adjoint_casimir == pytest.approx(3.0, rel=1e-12)

    lam1 = np.array([[0, 1, 0], [1, 0, 0], [0, 0, 0]], dtype=complex)
    lam8 = np.diag([1, 1, -2]).astype(complex) / np.sqrt(3.0)
    assert np.allclose(rep.generators[0], lam1 / 2.0, atol=1e-15)
    assert np.allclose(rep.generators[7], lam8 / 2.0, atol=1e-15)

    # standard antisymmetric structure constants of the Gell-Mann basis
    f = rep.structure_constants
    expected = {
        (0, 1, 2): 1.0,
        (0, 3, 6): 0.5,
        (0, 4, 5): -0.5,
        (1, 3, 5): 0.5,
        (1, 4, 6): 0.5,
        (2, 3, 4): 0.5,
        (2, 5, 6): -0.5,
        (3, 4, 7): np.sqrt(3.0) / 2.0,
        (5, 6, 7): np.sqrt(3.0) / 2.0,
    }
    for (i, j, k), val in expected.items():
        assert f[i, j, k] == pytest.approx(val, abs=1e-12), (i, j, k)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_sun_invariants(n):
    rep = build_sun_fundamental(n)
    assert rep.dim_algebra == n * n - 1
    assert rep.normalization == pytest.approx(0.5, rel=1e-12)
    assert rep.casimir_eigenvalue == pytest.approx((n * n - 1) / (2.0 * n), rel=1e-12)
    assert rep.adjoint_casimir == pytest.approx(float(n), rel=1e-11)


def test_structure_constants_total_antisymmetry():
    f = build_sun_fundamental(3).structure_constants
    assert np.max(np.abs(f + f.transpose(1, 0, 2))) < 1e-12
    assert np.max(np.abs(f + f.transpose(0, 2, 1))) < 1e-12
    assert np.max(np.abs(f - f.transpose(1, 2, 0))) < 1e-12


def test_casimir_matrix_is_scalar():
    for rep in (build_su2_irrep(3), build_sun_fundamental(4)):
        target = rep.casimir_eigenvalue * np.eye(rep.dim_hilbert)
        assert np.max(np.abs(rep.casimir_matrix - target)) < 1e-12


def test_adjoint_casimir_contraction_route():
    rep = build_su2_irrep(4)
    f = rep.structure_constants
    contraction = np.einsum("ikl,jkl->ij", f, f)
    assert np.allclose(contraction, 2.0 * np.eye(3), atol=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.floats(min_value=0.3, max_value=3.0))
def test_rescaling_covariance(scale):
    base = build_su2_irrep(2)
    rep = rescaled(base, scale)
    s2 = scale * scale
    assert rep.normalization == pytest.approx(s2 * base.normalization, rel=1e-12)
    assert rep.casimir_eigenvalue == pytest.approx(s2 * base.casimir_eigenvalue, rel=1e-12)
    assert rep.adjoint_casimir == pytest.approx(s2 * base.adjoint_casimir, rel=1e-11)
    assert np.allclose(
        rep.structure_constants, scale * base.structure_constants, atol=1e-11
    )


def test_unitary_conjugation_preserves_structure():
    # conjugation by a group element is an algebra automorphism: same f, same gram
    base = build_sun_fundamental(3)
    rng = np.random.default_rng(17)
    theta = rng.uniform(-1, 1, base.dim_algebra)
    u = scipy.linalg.expm(1j * np.tensordot(theta, base.generators, axes=(0, 0)))
    gens = np.einsum("ab,kbc,cd->kad", u.conj().T, base.generators, u)
    gens = 0.5 * (gens + np.conj(np.swapaxes(gens, -1, -2)))
    rep = algebra_from_generators(gens)
    assert np.max(np.abs(rep.structure_constants - base.structure_constants)) < 1e-9
    assert np.max(np.abs(rep.gram - base.gram)) < 1e-10


def test_killing_normalized_unit_adjoint():
    rep = killing_normalized(build_sun_fundamental(3))
    assert rep.adjoint_casimir == pytest.approx(1.0, rel=1e-10)


def test_not_closed_rejected():
    rep = build_su2_irrep(2)
    with pytest.raises(ValueError, match="closed"):
        compute_structure_constants(rep.generators[:2])


def test_reducible_rejected():
    # block sum of two different spins has uniform gram but a non-scalar
    # quadratic invariant
    a = build_su2_irrep(1).generators
    b = build_su2_irrep(2).generators
    gens = np.stack(
        [scipy.linalg.block_diag(a[k], b[k]) for k in range(3)]
    )
    with pytest.raises(ValueError, match="not irreducible"):
        algebra_from_generators(gens)


def test_non_hermitian_rejected():
    gens = build_su2_irrep(1).generators.copy()
    gens[0] = gens[0] + 1e-6j * np.eye(2)
    with pytest.raises(ValueError, match="Hermitian"):
        algebra_from_generators(gens)


def test_nonuniform_norm_rejected():
    gens = build_su2_irrep(2).generators.copy()
    gens[2] = 2.0 * gens[2]
    with pytest.raises(ValueError, match="uniform"):
        algebra_from_generators(gens)


@pytest.mark.parametrize("bad", [0, -1, 2.5])
def test_su2_bad_spin_rejected(bad):
    with pytest.raises(ValueError):
        build_su2_irrep(bad)


@pytest.mark.parametrize("bad", [0, 1, -3])
def test_sun_bad_dim_rejected(bad):
    with pytest.raises(ValueError):
        build_sun_fundamental(bad)


def test_generators_read_only():
    rep = build_su2_irrep(2)
    with pytest.raises(ValueError):
        rep.generators[0, 0, 0] = 1.0


def test_debug_dict_round_trip():
    rep = build_sun_fundamental(2)
    dump = rep_debug_dict(rep)
    gens = np.array(
        [[[complex(re, im) for re, im in row] for row in g] for g in dump["generators"]]
    )
    assert np.allclose(gens, rep.generators, atol=1e-15)
    assert dump["dim_algebra"] == 3
    assert np.allclose(
        np.array(dump["structure_constants"]), rep.structure_constants, atol=1e-15
    )
