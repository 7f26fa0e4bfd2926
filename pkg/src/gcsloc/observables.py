"""State functionals of the measured algebra: uncertainty, purity, covariance.

For a normalized pure state |psi> and generators X_1..X_K the central
quantities are

    expectation vector   v_k   = <X_k>
    generalized purity   P     = sum_k v_k^2
    total uncertainty    Delta = sum_k <X_k^2> - P = c - P
    covariance matrix    M_kl  = <X_k X_l + X_l X_k> - 2 v_k v_l
    squared norm         T     = sum_kl M_kl^2
    localization drift   D     = 2 gamma (c_adj P - T)

D is the ensemble-average time derivative of Delta under pure measurement
dynamics; it is nonpositive everywhere and vanishes exactly on the
coherent-state orbit of the highest weight, where T attains its global
minimum over pure states.  ``uncertainty_bounds`` exposes the two
root-space constants that bracket Delta:

    delta_min = (hw, root sum)   <=  Delta  <=  c = (hw, hw + root sum).

``cartan_split_sums`` partitions T in the adapted (Cartan plus root pair)
basis; the root-pair block has a closed form in ladder-operator moments
for states whose expectation vector has been rotated into the Cartan span,
which ``root_pair_closed_form`` evaluates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import AlgebraRep
from .cartan import CartanData

__all__ = [
    "CartanSplit",
    "UncertaintyReport",
    "covariance_matrix",
    "covariance_trace_norm",
    "cartan_split_sums",
    "expectation_vector",
    "generalized_purity",
    "localization_drift",
    "root_pair_closed_form",
    "total_uncertainty",
    "uncertainty_bounds",
    "uncertainty_report",
]

BOUNDS_CONSISTENCY_TOL = 1e-6


def _as_state(psi):
    psi = np.asarray(psi, dtype=complex)
    if psi.ndim != 1:
        raise ValueError(f"expected a state vector, got shape {psi.shape}")
    nrm = np.linalg.norm(psi)
    if abs(nrm - 1.0) > 1e-8:
        raise ValueError(f"state is not normalized: |psi| = {nrm:.12g}")
    return psi


def expectation_vector(psi, rep: AlgebraRep) -> np.ndarray:
    """<X_k> for every generator, a real vector of length K."""
    psi = _as_state(psi)
    return np.real(np.einsum("a,kab,b->k", psi.conj(), rep.generators, psi))


def generalized_purity(psi, rep: AlgebraRep) -> float:
    """Squared Euclidean length of the expectation vector."""
    v = expectation_vector(psi, rep)
    return float(v @ v)


def total_uncertainty(psi, rep: AlgebraRep) -> float:
    """sum_k <X_k^2> - sum_k <X_k>^2, the basis-invariant variance sum."""
    psi = _as_state(psi)
    second = float(np.real(np.einsum("a,ab,b->", psi.conj(), rep.casimir_matrix, psi)))
    v = np.real(np.einsum("a,kab,b->k", psi.conj(), rep.generators, psi))
    return second - float(v @ v)


def covariance_matrix(psi, rep: AlgebraRep) -> np.ndarray:
    """Symmetrized covariance M_kl = <{X_k, X_l}> - 2 <X_k><X_l>."""
    psi = _as_state(psi)
    y = np.einsum("kab,b->ka", rep.generators, psi)
    v = np.real(y @ psi.conj())
    m = 2.0 * np.real(np.conj(y) @ y.T) - 2.0 * np.outer(v, v)
    return m


def covariance_trace_norm(psi, rep: AlgebraRep) -> float:
    """Squared Frobenius norm sum_kl M_kl^2 of the covariance matrix."""
    m = covariance_matrix(psi, rep)
    return float(np.sum(m * m))


def localization_drift(psi, rep: AlgebraRep, gamma: float) -> float:
    """Ensemble-mean uncertainty drift rate 2 gamma (c_adj P - sum M^2).

    Nonpositive for every pure state; zero exactly on the coherent-state
    orbit.
    """
    if gamma < 0:
        raise ValueError(f"gamma must be nonnegative, got {gamma}")
    p = generalized_purity(psi, rep)
    t = covariance_trace_norm(psi, rep)
    return 2.0 * gamma * (rep.adjoint_casimir * p - t)


@dataclass(frozen=True)
class UncertaintyReport:
    """Snapshot of the localization functionals for one state."""

    uncertainty: float
    purity: float
    casimir_eigenvalue: float
    delta_min: float
    cov_trace_norm: float
    drift: float


def uncertainty_report(
    psi, rep: AlgebraRep, cartan: CartanData, gamma: float = 0.0
) -> UncertaintyReport:
    delta_min, _ = uncertainty_bounds(rep, cartan)
    return UncertaintyReport(
        uncertainty=total_uncertainty(psi, rep),
        purity=generalized_purity(psi, rep),
        casimir_eigenvalue=rep.casimir_eigenvalue,
        delta_min=delta_min,
        cov_trace_norm=covariance_trace_norm(psi, rep),
        drift=localization_drift(psi, rep, gamma),
    )


def uncertainty_bounds(rep: AlgebraRep, cartan: CartanData):
    """(delta_min, c): the invariant range of the total uncertainty.

    delta_min = (hw, root sum) is the uncertainty of the extremal state and
    its orbit; c = (hw, hw + root sum) is the quadratic invariant reached
    by completely delocalized states.  Both are cross-checked against the
    state-level moments of the extremal state; a mismatch beyond 1e-6
    signals an inconsistent normalization between the root-space pairing
    and the generator basis.
    """
    hw = cartan.highest_weight
    mu = cartan.positive_root_sum
    delta_min = float(hw @ mu)
    c_pair = float(hw @ (hw + mu))

    v = cartan.weight_basis[:, cartan.highest_weight_index]
    delta_state = total_uncertainty(v, rep)
    if abs(delta_state - delta_min) > BOUNDS_CONSISTENCY_TOL * max(1.0, abs(delta_min)):
        raise ValueError(
            "normalization inconsistency between root space and generators: "
            f"(hw, root sum) = {delta_min:.12g} but extremal-state "
            f"uncertainty = {delta_state:.12g}"
        )
    if abs(c_pair - rep.casimir_eigenvalue) > BOUNDS_CONSISTENCY_TOL * max(
        1.0, abs(rep.casimir_eigenvalue)
    ):
        raise ValueError(
            "normalization inconsistency between root space and generators: "
            f"(hw, hw + root sum) = {c_pair:.12g} but invariant = "
            f"{rep.casimir_eigenvalue:.12g}"
        )
    return delta_min, float(rep.casimir_eigenvalue)


@dataclass(frozen=True)
class CartanSplit:
    """Partition of sum M^2 over ordered index pairs in the adapted basis.

    cartan_block : both indices in the Cartan rows.
    mixed_block : one Cartan row, one root row (both orders).
    same_line_block : both indices in the two rows of one positive root.
    cross_line_block : root rows of two different positive roots.
    The four blocks sum to the full squared covariance norm.
    """

    cartan_block: float
    mixed_block: float
    same_line_block: float
    cross_line_block: float
    total: float


def cartan_split_sums(psi, rep: AlgebraRep, cartan: CartanData) -> CartanSplit:
    """Partition the squared covariance norm by adapted-basis sectors."""
    m = covariance_matrix(psi, rep)
    o = cartan.basis_rotation
    mt = o @ m @ o.T
    r = cartan.rank
    sq = mt * mt

    cartan_block = float(np.sum(sq[:r, :r]))
    mixed_block = float(np.sum(sq[:r, r:]) + np.sum(sq[r:, :r]))
    same = 0.0
    for k in range(cartan.n_positive):
        p = r + 2 * k
        block = sq[p : p + 2, p : p + 2]
        same += float(np.sum(block))
    root_total = float(np.sum(sq[r:, r:]))
    cross = root_total - same
    total = float(np.sum(sq))
    return CartanSplit(
        cartan_block=cartan_block,
        mixed_block=mixed_block,
        same_line_block=same,
        cross_line_block=cross,
        total=total,
    )


def root_pair_closed_form(psi, cartan: CartanData) -> float:
    """Ladder-moment value of the same-line block in the Cartan gauge.

    For a state whose expectation vector lies in the Cartan span,

        same_line_block = sum_{a > 0} 8 |<E_a^2>|^2 + 2 <E_a E_-a + E_-a E_a>^2.

    The caller is responsible for the gauge (see
    ``align_expectation_to_cartan``); without it the identity fails.
    """
    psi = _as_state(psi)
    out = 0.0
    for E in cartan.raising_ops:
        e2 = complex(psi.conj() @ (E @ (E @ psi)))
        anti = float(
            np.real(psi.conj() @ (E @ (E.conj().T @ psi) + E.conj().T @ (E @ psi)))
        )
        out += 8.0 * abs(e2) ** 2 + 2.0 * anti**2
    return out
