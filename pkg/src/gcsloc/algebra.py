"""Hermitian matrix representations of compact semisimple Lie algebras.

Basis convention used throughout the package: K Hermitian generators
X_1..X_K acting on a d-dimensional Hilbert space, trace-orthogonal with a
uniform norm

    tr(X_i X_j) = lam * delta_ij,

and closed under commutation,

    [X_i, X_j] = 1j * sum_k f[i, j, k] X_k,

with real, totally antisymmetric structure constants f.  For an
irreducible representation the sum of squared generators is a multiple of
the identity (the quadratic invariant), and the double-commutator sum
sum_j [X_j, [X_j, X_i]] acts as a fixed multiple of every generator (the
adjoint-representation invariant).  Both scalars are extracted and
cross-checked when a representation is constructed.

Builders are provided for the spin-j representations of su(2) and for the
fundamental representation of su(N) in a generalized Gell-Mann basis.
Arbitrary closed Hermitian generator sets can be wrapped with
``algebra_from_generators``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "AlgebraRep",
    "algebra_from_generators",
    "build_su2_irrep",
    "build_sun_fundamental",
    "casimir_constants",
    "compute_structure_constants",
    "killing_normalized",
    "rescaled",
    "rep_debug_dict",
]

# Construction-time tolerances.  Hermiticity and gram uniformity are
# properties of how the input matrices were written down, so they are held
# to near machine precision; closure and the invariant proportionality
# checks involve O(K^2) floating-point contractions and get more slack.
HERMITICITY_TOL = 1e-12
GRAM_TOL = 1e-10
ANTISYMMETRY_TOL = 1e-10
CLOSURE_TOL = 1e-8
PROPORTIONALITY_TOL = 1e-8
ADJOINT_CONSISTENCY_TOL = 1e-8


def _max_abs(a):
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


@dataclass(frozen=True)
class AlgebraRep:
    """An irreducible Hermitian representation of a compact semisimple algebra.

    Attributes
    ----------
    generators : (K, d, d) complex ndarray
        Hermitian generators X_i, trace-orthogonal with uniform norm.
    structure_constants : (K, K, K) real ndarray
        f[i, j, k] with [X_i, X_j] = 1j * sum_k f[i, j, k] X_k.
    gram : (K, K) real ndarray
        tr(X_i X_j); diagonal with equal entries by construction.
    casimir_eigenvalue : float
        Scalar c with sum_j X_j^2 = c * I.
    adjoint_casimir : float
        Scalar c_adj with sum_j [X_j, [X_j, X_i]] = c_adj * X_i.
    normalization : float
        The uniform trace norm lam = tr(X_i^2).
    casimir_matrix : (d, d) complex ndarray
        The matrix sum_j X_j^2, kept for cheap expectation values.
    """

    generators: np.ndarray
    structure_constants: np.ndarray
    gram: np.ndarray
    casimir_eigenvalue: float
    adjoint_casimir: float
    normalization: float
    casimir_matrix: np.ndarray

    @property
    def dim_algebra(self) -> int:
        return self.generators.shape[0]

    @property
    def dim_hilbert(self) -> int:
        return self.generators.shape[1]

    def __repr__(self):
        return (
            f"AlgebraRep(K={self.dim_algebra}, d={self.dim_hilbert}, "
            f"lam={self.normalization:.6g}, c={self.casimir_eigenvalue:.6g}, "
            f"c_adj={self.adjoint_casimir:.6g})"
        )


def _check_hermitian(gens):
    resid = _max_abs(gens - np.conj(np.swapaxes(gens, -1, -2)))
    if resid > HERMITICITY_TOL:
        raise ValueError(
            f"generators are not Hermitian: max |X - X^dag| = {resid:.3e} "
            f"exceeds {HERMITICITY_TOL:.0e}"
        )


def _gram_matrix(gens):
    return np.real(np.einsum("iab,jba->ij", gens, gens))


def _uniform_norm(gram):
    """Extract lam from the gram matrix, insisting on uniform diagonal."""
    diag = np.diag(gram)
    lam = float(np.mean(diag))
    scale = max(abs(lam), 1.0)
    off = _max_abs(gram - lam * np.eye(gram.shape[0]))
    if off > GRAM_TOL * scale:
        raise ValueError(
            "generators are not trace-orthogonal with uniform norm: "
            f"max |tr(X_i X_j) - lam d_ij| = {off:.3e} (lam = {lam:.6g})"
        )
    if lam <= 0:
        raise ValueError(f"generator trace norm must be positive, got {lam:.6g}")
    return lam


def compute_structure_constants(generators, normalization=None):
    """Extract real antisymmetric structure constants from a generator set.

    Parameters
    ----------
    generators : (K, d, d) array_like
        Hermitian matrices, trace-orthogonal with uniform norm lam.
    normalization : float, optional
        lam = tr(X_i^2).  Computed (and validated) from the generators when
        omitted.

    Returns
    -------
    f : (K, K, K) real ndarray
        Structure constants with [X_i, X_j] = 1j * sum_k f[i, j, k] X_k.

    Raises
    ------
    ValueError
        If the generators are not Hermitian, not uniformly trace-orthogonal,
        or do not close under commutation (residual above 1e-8 of the
        commutator scale): the set is then not a closed algebra basis.
    """
    gens = np.asarray(generators, dtype=complex)
    if gens.ndim != 3 or gens.shape[1] != gens.shape[2]:
        raise ValueError(f"expected shape (K, d, d), got {gens.shape}")
    _check_hermitian(gens)
    if normalization is None:
        normalization = _uniform_norm(_gram_matrix(gens))

    prod = np.einsum("iab,jbc->ijac", gens, gens)
    comm = prod - prod.transpose(1, 0, 2, 3)
    f_complex = np.einsum("ijab,kba->ijk", comm, gens) * (-1j / normalization)

    imag_resid = _max_abs(f_complex.imag)
    scale = max(_max_abs(f_complex), 1.0)
    if imag_resid > 1e-11 * scale:
        raise ValueError(
            f"structure constants are not real: max imaginary part {imag_resid:.3e}"
        )
    f = np.ascontiguousarray(f_complex.real)

    # Closure: the commutators must be reproduced by the extracted constants,
    # otherwise the generator span is not a closed algebra.
    recon = 1j * np.einsum("ijk,kab->ijab", f, gens)
    closure_resid = _max_abs(comm - recon)
    comm_scale = max(_max_abs(comm), 1.0)
    if closure_resid > CLOSURE_TOL * comm_scale:
        raise ValueError(
            "generators do not span a closed algebra: commutator residual "
            f"{closure_resid:.3e} exceeds {CLOSURE_TOL:.0e} of scale {comm_scale:.3g}"
        )

    anti = max(
        _max_abs(f + f.transpose(1, 0, 2)),
        _max_abs(f + f.transpose(0, 2, 1)),
    )
    if anti > ANTISYMMETRY_TOL * scale:
        raise ValueError(
            f"structure constants are not totally antisymmetric: residual {anti:.3e}"
        )
    return f


def casimir_constants(generators, structure_constants, normalization):
    """Quadratic invariants of the representation and of the adjoint action.

    Returns (c, c_adj) where sum_j X_j^2 = c I and
    sum_j [X_j, [X_j, X_i]] = c_adj X_i.  Raises ValueError when either
    proportionality fails, e.g. for a reducible representation.
    """
    gens = np.asarray(generators, dtype=complex)
    K, d = gens.shape[0], gens.shape[1]

    cas = np.einsum("jab,jbc->ac", gens, gens)
    c = float(np.real(np.trace(cas)) / d)
    resid = _max_abs(cas - c * np.eye(d))
    if resid > PROPORTIONALITY_TOL * max(abs(c), 1.0):
        raise ValueError(
            "sum of squared generators is not proportional to the identity "
            f"(residual {resid:.3e}): representation not irreducible"
        )

    # The double-commutator scalar also equals the structure-constant
    # contraction sum_{kl} f[i,k,l] f[j,k,l] = c_adj d_ij; both routes are
    # computed and must agree.
    f = structure_constants
    contraction = np.einsum("ikl,jkl->ij", f, f)
    c_adj = float(np.trace(contraction) / K)
    resid = _max_abs(contraction - c_adj * np.eye(K))
    if resid > ADJOINT_CONSISTENCY_TOL * max(abs(c_adj), 1.0):
        raise ValueError(
            f"adjoint invariant is not isotropic: residual {resid:.3e}"
        )

    probe = gens[0]
    double = np.zeros_like(probe)
    for Xj in gens:
        inner = Xj @ probe - probe @ Xj
        double += Xj @ inner - inner @ Xj
    direct = float(np.real(np.einsum("ab,ba->", double, probe)) / normalization)
    if abs(direct - c_adj) > ADJOINT_CONSISTENCY_TOL * max(abs(c_adj), 1.0):
        raise ValueError(
            "adjoint invariant mismatch between double-commutator "
            f"({direct:.12g}) and structure-constant contraction ({c_adj:.12g})"
        )
    return c, c_adj


def algebra_from_generators(generators) -> AlgebraRep:
    """Validate a Hermitian generator set and package it as an AlgebraRep.

    The generators must be Hermitian to 1e-12, trace-orthogonal with a
    uniform positive norm, closed under commutation, and irreducible.
    """
    gens = np.asarray(generators, dtype=complex)
    if gens.ndim != 3 or gens.shape[1] != gens.shape[2]:
        raise ValueError(f"expected shape (K, d, d), got {gens.shape}")
    if gens.shape[0] < 1:
        raise ValueError("need at least one generator")
    _check_hermitian(gens)
    gram = _gram_matrix(gens)
    lam = _uniform_norm(gram)
    f = compute_structure_constants(gens, normalization=lam)
    c, c_adj = casimir_constants(gens, f, lam)
    cas = np.einsum("jab,jbc->ac", gens, gens)

    gens = np.ascontiguousarray(gens)
    for arr in (gens, f, gram, cas):
        arr.flags.writeable = False
    return AlgebraRep(
        generators=gens,
        structure_constants=f,
        gram=gram,
        casimir_eigenvalue=c,
        adjoint_casimir=c_adj,
        normalization=lam,
        casimir_matrix=cas,
    )


def build_su2_irrep(two_j: int) -> AlgebraRep:
    """Spin-j representation of su(2) in the standard angular-momentum basis.

    Parameters
    ----------
    two_j : int
        Twice the spin, a positive integer (two_j = 2 means spin 1).

    Returns
    -------
    AlgebraRep
        Generators (J_x, J_y, J_z) on a (two_j + 1)-dimensional space, with
        J_z diagonal and eigenvalues j, j-1, ..., -j.  The uniform trace
        norm is j(j+1)(2j+1)/3 and the quadratic invariant is j(j+1).
    """
    if not isinstance(two_j, (int, np.integer)):
        raise ValueError(f"two_j must be an integer, got {two_j!r}")
    if two_j < 1:
        raise ValueError(f"two_j must be >= 1, got {two_j}")
    j = two_j / 2.0
    m = np.arange(two_j, -two_j - 1, -2) / 2.0
    d = two_j + 1

    jz = np.diag(m).astype(complex)
    jp = np.zeros((d, d), dtype=complex)
    # Raising connects m_k -> m_k + 1, i.e. column k to row k-1 in the
    # descending-m ordering.
    for k in range(1, d):
        jp[k - 1, k] = np.sqrt((j - m[k]) * (j + m[k] + 1.0))
    jm = jp.conj().T
    jx = (jp + jm) / 2.0
    jy = (jp - jm) / 2.0j
    return algebra_from_generators(np.stack([jx, jy, jz]))


def build_sun_fundamental(n: int) -> AlgebraRep:
    """Fundamental representation of su(N) in a generalized Gell-Mann basis.

    Parameters
    ----------
    n : int
        Matrix dimension N >= 2.

    Returns
    -------
    AlgebraRep
        N^2 - 1 generators normalized to tr(X_i X_j) = delta_ij / 2.  The
        ordering walks the dimension shells k = 2..N: for each k first the
        symmetric and antisymmetric pair generators (j, k) for j < k, then
        the diagonal generator of shell k.  For N = 2 this is (sigma_x,
        sigma_y, sigma_z)/2 and for N = 3 the Gell-Mann matrices over 2 in
        their standard order.
    """
    if not isinstance(n, (int, np.integer)):
        raise ValueError(f"n must be an integer, got {n!r}")
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    gens = []
    for k in range(2, n + 1):
        for j in range(1, k):
            sym = np.zeros((n, n), dtype=complex)
            sym[j - 1, k - 1] = sym[k - 1, j - 1] = 0.5
            gens.append(sym)
            anti = np.zeros((n, n), dtype=complex)
            anti[j - 1, k - 1] = -0.5j
            anti[k - 1, j - 1] = 0.5j
            gens.append(anti)
        diag = np.zeros((n, n), dtype=complex)
        coeff = np.sqrt(1.0 / (2.0 * k * (k - 1)))
        for j in range(k - 1):
            diag[j, j] = coeff
        diag[k - 1, k - 1] = -coeff * (k - 1)
        gens.append(diag)
    return algebra_from_generators(np.stack(gens))


def rescaled(rep: AlgebraRep, scale: float) -> AlgebraRep:
    """Rebuild the representation with generators multiplied by `scale`.

    Rescaling X -> s X multiplies f by s, lam by s^2, and both invariants
    by s^2; the rebuilt representation revalidates all of that.
    """
    if scale <= 0:
        raise ValueError(f"scale must be positive, got {scale}")
    return algebra_from_generators(rep.generators * scale)


def killing_normalized(rep: AlgebraRep) -> AlgebraRep:
    """Rescale so the adjoint invariant is 1 (Killing-orthonormal basis)."""
    return rescaled(rep, 1.0 / np.sqrt(rep.adjoint_casimir))


def rep_debug_dict(rep: AlgebraRep) -> dict:
    """JSON-serializable dump of the generators and structure constants.

    Complex entries become [real, imag] pairs, row-major.
    """

    def complex_matrix(m):
        return [[[float(z.real), float(z.imag)] for z in row] for row in m]

    return {
        "dim_algebra": rep.dim_algebra,
        "dim_hilbert": rep.dim_hilbert,
        "normalization": rep.normalization,
        "casimir_eigenvalue": rep.casimir_eigenvalue,
        "adjoint_casimir": rep.adjoint_casimir,
        "generators": [complex_matrix(g) for g in rep.generators],
        "structure_constants": rep.structure_constants.tolist(),
    }
