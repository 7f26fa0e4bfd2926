import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st

from gcsloc.algebra import (
    algebra_from_generators,
    build_su2_irrep,
    build_sun_fundamental,
)
from gcsloc.cartan import (
    align_expectation_to_cartan,
    cartan_debug_dict,
    cartan_decompose,
    generate_gcs,
    highest_weight_state,
    su2_triple_for_root,
    weight_string,
)
from gcsloc.observables import total_uncertainty, uncertainty_bounds


@pytest.fixture(scope="module")
def su2_j1():
    rep = build_su2_irrep(2)
    return rep, cartan_decompose(rep)


@pytest.fixture(scope="module")
def su3():
    rep = build_sun_fundamental(3)
    return rep, cartan_decompose(rep)


def comm(a, b):
    return a @ b - b @ a


def test_su2_rank_and_roots(su2_j1):
    rep, cartan = su2_j1
    assert cartan.rank == 1
    assert cartan.n_positive == 1
    assert np.allclose(cartan.positive_roots, [[1.0]], atol=1e-10)
    assert np.allclose(np.sort(cartan.roots, axis=0), [[-1.0], [1.0]], atol=1e-10)
    # the diagonal generator is preferred as the Cartan direction
    assert np.allclose(cartan.cartan_generators[0], rep.generators[2], atol=1e-12)
    assert np.allclose(cartan.highest_weight, [1.0], atol=1e-10)
    assert np.allclose(cartan.positive_root_sum, [1.0], atol=1e-10)


@pytest.mark.parametrize("two_j", [1, 2, 3, 5])
def test_su2_weights_are_m_ladder(two_j):
    rep = build_su2_irrep(two_j)
    cartan = cartan_decompose(rep)
    j = two_j / 2.0
    expected = j - np.arange(two_j + 1)
    assert np.allclose(cartan.weights[:, 0], expected, atol=1e-10)
    assert cartan.highest_weight_index == 0
    # weight basis columns are the standard basis since J_z is diagonal
    # with m descending
    overlap = np.abs(cartan.weight_basis) - np.eye(two_j + 1)
    assert np.max(np.abs(overlap)) < 1e-10


def test_su2_raising_op_is_jplus(su2_j1):
    rep, cartan = su2_j1
    jp = rep.generators[0] + 1j * rep.generators[1]
    e = cartan.raising_ops[0]
    # proportional with |ratio| fixed by tr(E^dag E) = lam
    ratio = np.vdot(jp, e) / np.vdot(jp, jp)
    assert np.max(np.abs(e - ratio * jp)) < 1e-10
    assert abs(abs(ratio) - np.sqrt(rep.normalization / np.trace(jp.conj().T @ jp).real)) < 1e-10


def test_su3_rank_roots_weights(su3):
    rep, cartan = su3
    assert cartan.rank == 2
    assert cartan.n_positive == 3
    assert cartan.roots.shape == (6, 2)

    # roots come in opposite pairs and all have squared length 1
    root_set = {tuple(np.round(r, 9)) for r in cartan.roots}
    for r in cartan.roots:
        assert tuple(np.round(-r, 9)) in root_set
    assert np.allclose(np.sum(cartan.roots, axis=0), [0.0, 0.0], atol=1e-9)
    assert np.allclose(np.einsum("ai,ai->a", cartan.roots, cartan.roots), 1.0,
                       atol=1e-9)

    # weight set of the defining representation, order-insensitive
    s3 = np.sqrt(3.0)
    expected = {(0.5, round(1 / (2 * s3), 12)), (-0.5, round(1 / (2 * s3), 12)),
                (0.0, round(-1 / s3, 12))}
    got = {tuple(np.round(w, 12)) for w in cartan.weights}
    assert got == expected

    assert np.allclose(cartan.highest_weight, [0.5, 1 / (2 * s3)], atol=1e-9)
    assert np.allclose(cartan.positive_root_sum, [2.0, 0.0], atol=1e-9)

    # roots are exactly the differences of distinct weights
    diffs = {
        tuple(np.round(wa - wb, 9))
        for i, wa in enumerate(cartan.weights)
        for k, wb in enumerate(cartan.weights)
        if i != k
    }
    got_roots = {tuple(np.round(r, 9)) for r in cartan.roots}
    assert got_roots == diffs


@pytest.mark.parametrize("builder,arg", [
    (build_su2_irrep, 3),
    (build_sun_fundamental, 3),
    (build_sun_fundamental, 4),
])
def test_ladder_relations(builder, arg):
    rep = builder(arg)
    cartan = cartan_decompose(rep)
    lam = rep.normalization
    for m, alpha in enumerate(cartan.positive_roots):
        e = cartan.raising_ops[m]
        # [H_i, E] = alpha_i E
        for i in range(cartan.rank):
            resid = comm(cartan.cartan_generators[i], e) - alpha[i] * e
            assert np.max(np.abs(resid)) < 1e-9
        # [E, E^dag] = alpha . H
        target = np.tensordot(alpha, cartan.cartan_generators, axes=(0, 0))
        assert np.max(np.abs(comm(e, e.conj().T) - target)) < 1e-8
        # normalization tr(E^dag E) = lam
        assert np.trace(e.conj().T @ e).real == pytest.approx(lam, rel=1e-9)


def test_highest_weight_state_annihilated(su3):
    rep, cartan = su3
    hw = highest_weight_state(cartan)
    assert np.linalg.norm(hw) == pytest.approx(1.0, abs=1e-12)
    for e in cartan.raising_ops:
        assert np.linalg.norm(e @ hw) < 1e-9
    # eigenstate of each Cartan generator at the highest weight
    for i, h in enumerate(cartan.cartan_generators):
        assert np.linalg.norm(h @ hw - cartan.highest_weight[i] * hw) < 1e-9


def test_gcs_zero_params_is_highest_weight(su2_j1):
    rep, cartan = su2_j1
    psi = generate_gcs(rep, cartan, np.zeros(3))
    hw = highest_weight_state(cartan)
    assert np.abs(np.vdot(hw, psi)) == pytest.approx(1.0, abs=1e-12)


def test_gcs_pi_rotation_flips_spin(su2_j1):
    rep, cartan = su2_j1
    # exp(i pi J_x) maps |j, j> to |j, -j> up to phase
    psi = generate_gcs(rep, cartan, [np.pi, 0.0, 0.0])
    bottom = np.zeros(3, dtype=complex)
    bottom[-1] = 1.0
    assert np.abs(np.vdot(bottom, psi)) == pytest.approx(1.0, abs=1e-10)


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=2 ** 32 - 1))
def test_gcs_orbit_saturates_uncertainty_bound(seed):
    rep = build_su2_irrep(3)
    cartan = cartan_decompose(rep)
    delta_min, _ = uncertainty_bounds(rep, cartan)
    rng = np.random.default_rng(seed)
    psi = generate_gcs(rep, cartan, rng.uniform(-3, 3, rep.dim_algebra))
    assert total_uncertainty(psi, rep) == pytest.approx(delta_min, abs=1e-9)


def test_gcs_bad_params_shape(su2_j1):
    rep, cartan = su2_j1
    with pytest.raises(ValueError, match="shape"):
        generate_gcs(rep, cartan, [0.1, 0.2])


@pytest.mark.parametrize("builder,arg", [
    (build_su2_irrep, 4),
    (build_sun_fundamental, 3),
])
def test_su2_triples(builder, arg):
    rep = builder(arg)
    cartan = cartan_decompose(rep)
    for m in range(cartan.n_positive):
        e3, ep, em = su2_triple_for_root(cartan, m)
        assert np.max(np.abs(comm(e3, ep) - ep)) < 1e-9
        assert np.max(np.abs(comm(e3, em) + em)) < 1e-9
        assert np.max(np.abs(comm(ep, em) - e3)) < 1e-8
        assert np.max(np.abs(em - ep.conj().T)) < 1e-12


@pytest.mark.parametrize("two_j", [1, 2, 3, 4, 5, 6])
def test_weight_strings_su2(two_j):
    rep = build_su2_irrep(two_j)
    cartan = cartan_decompose(rep)
    j = two_j / 2.0
    for s in range(two_j + 1):
        jj, mm = weight_string(cartan, s, 0)
        assert jj == pytest.approx(j, abs=1e-12)
        assert mm == pytest.approx(j - s, abs=1e-12)


def test_weight_strings_su3(su3):
    rep, cartan = su3
    for m in range(cartan.n_positive):
        alpha = cartan.positive_roots[m]
        content = []
        for s in range(rep.dim_hilbert):
            jj, mm = weight_string(cartan, s, m)
            # position reproduces the pairing formula
            pairing = float(alpha @ cartan.weights[s]) / float(alpha @ alpha)
            assert mm == pytest.approx(pairing, abs=1e-8)
            content.append((jj, round(mm, 6)))
        # every root sees one doublet and one singlet
        assert sorted(content) == [(0.0, 0.0), (0.5, -0.5), (0.5, 0.5)]


def haar_state(dim, seed):
    rng = np.random.default_rng(seed)
    z = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return z / np.linalg.norm(z)


def root_component_norm(psi, rep, cartan):
    v = np.real(np.einsum("a,kab,b->k", psi.conj(), rep.generators, psi))
    return float(np.linalg.norm((cartan.basis_rotation @ v)[cartan.rank:]))


@pytest.mark.parametrize("builder,arg,method", [
    (build_su2_irrep, 3, "auto"),      # axis-angle path (K = 3)
    (build_sun_fundamental, 3, "auto"),  # eigenbasis path (K = d^2 - 1)
    (build_su2_irrep, 4, "newton"),
    (build_sun_fundamental, 4, "newton"),
])
def test_alignment_paths(builder, arg, method):
    rep = builder(arg)
    cartan = cartan_decompose(rep)
    for seed in range(6):
        psi = haar_state(rep.dim_hilbert, 1000 + seed)
        out = align_expectation_to_cartan(psi, rep, cartan, method=method)
        assert root_component_norm(out, rep, cartan) < 1e-8
        # group rotations preserve the uncertainty and the expectation norm
        assert total_uncertainty(out, rep) == pytest.approx(
            total_uncertainty(psi, rep), abs=1e-9
        )
        v_in = np.real(np.einsum("a,kab,b->k", psi.conj(), rep.generators, psi))
        v_out = np.real(np.einsum("a,kab,b->k", out.conj(), rep.generators, out))
        assert np.linalg.norm(v_out) == pytest.approx(
            np.linalg.norm(v_in), abs=1e-9
        )


def test_alignment_noop_when_already_aligned(su2_j1):
    rep, cartan = su2_j1
    hw = highest_weight_state(cartan)
    out = align_expectation_to_cartan(hw, rep, cartan)
    assert np.allclose(out, hw, atol=1e-12)


def test_decompose_in_conjugated_basis():
    # no generator is diagonal after a generic rotation, which forces the
    # random-probe path; the invariant data must not change
    base = build_sun_fundamental(3)
    ref = cartan_decompose(base)
    rng = np.random.default_rng(99)
    theta = rng.uniform(-1, 1, base.dim_algebra)
    u = scipy.linalg.expm(1j * np.tensordot(theta, base.generators, axes=(0, 0)))
    gens = np.einsum("ab,kbc,cd->kad", u.conj().T, base.generators, u)
    gens = 0.5 * (gens + np.conj(np.swapaxes(gens, -1, -2)))
    rep = algebra_from_generators(gens)
    cartan = cartan_decompose(rep)

    assert cartan.rank == ref.rank
    assert cartan.n_positive == ref.n_positive
    # root geometry is basis-independent up to an orthogonal change of the
    # Cartan frame: compare the Gram matrices of sorted pairings
    def pairing_multiset(c):
        g = c.positive_roots @ c.positive_roots.T
        return np.sort(np.round(g.ravel(), 9))

    assert np.allclose(pairing_multiset(cartan), pairing_multiset(ref), atol=1e-8)
    # scalar invariants agree
    ref_min, ref_c = uncertainty_bounds(base, ref)
    got_min, got_c = uncertainty_bounds(rep, cartan)
    assert got_min == pytest.approx(ref_min, abs=1e-8)
    assert got_c == pytest.approx(ref_c, abs=1e-8)


def test_debug_dict_keys(su3):
    rep, cartan = su3
    dump = cartan_debug_dict(cartan)
    assert dump["rank"] == 2
    assert len(dump["positive_roots"]) == 3
    assert len(dump["weights"]) == 3
    assert np.allclose(dump["highest_weight"], cartan.highest_weight, atol=1e-15)
