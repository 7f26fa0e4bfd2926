"""Stochastic pure-state dynamics of weak simultaneous generator measurement,
and the matching Lindblad ensemble evolution.

Pure-state unraveling (Ito form, per step of size dt):

    dpsi = [ -1j H dt
             - gamma sum_k (X_k - <X_k>)^2 dt
             + sum_k (X_k - <X_k>) dxi_k ] psi,      dxi_k = sqrt(2 gamma dt) z_k,

with independent standard normals z_k per channel per step, followed by
renormalization.  The integrator is split-step: the Hamiltonian flow is
applied as a cached exact propagator exp(-1j H dt) and the measurement
terms as an Euler-Maruyama update evaluated at the propagated state.  The
splitting keeps purely Hamiltonian motion exact (the uncertainty functional
is then conserved to rounding, not to O(dt)), while the measurement update
is the standard order-1/2 strong scheme.

Ensemble counterpart:

    drho/dt = -1j [H, rho] - gamma sum_k [X_k, [X_k, rho]],

integrated with classic fixed-step RK4, plus an exact superoperator
exponential for cross-checks at small dimension.

Randomness is counter-based (Philox) with key = [seed, stream]; stream 0
feeds trajectory noise, stream 1 initial-state sampling, stream 2 scan
sampling.  Trajectory i of an ensemble uses seed + i on stream 0, so any
subset of trajectories is reproducible in isolation.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .algebra import AlgebraRep

__all__ = [
    "Hamiltonian",
    "NoiseConfig",
    "TrajectoryRecord",
    "ensemble_average",
    "ensemble_expectations",
    "ensemble_observables",
    "haar_state",
    "haar_states",
    "lindblad_evolve",
    "lindblad_expm_evolve",
    "lindblad_step",
    "lindblad_superoperator",
    "simulate_trajectory",
    "snlse_step",
    "stream_rng",
    "validate_density",
]

NOISE_STREAM = 0
INIT_STREAM = 1
SCAN_STREAM = 2

STABILITY_LIMIT = 0.01  # max allowed gamma * dt
DEFAULT_BLOCK = 256

_UINT64_MASK = (1 << 64) - 1


def stream_rng(seed: int, stream: int) -> np.random.Generator:
    """Counter-based generator for (seed, stream); independent across both."""
    key = [int(seed) & _UINT64_MASK, int(stream) & _UINT64_MASK]
    return np.random.Generator(np.random.Philox(key=key))


def haar_states(dim: int, n: int, seed: int) -> np.ndarray:
    """n Haar-random state vectors, rows of an (n, dim) array.

    Drawn as normalized i.i.d. complex Gaussians on the initial-state
    stream of `seed`.
    """
    rng = stream_rng(seed, INIT_STREAM)
    z = rng.standard_normal((n, dim)) + 1j * rng.standard_normal((n, dim))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def haar_state(dim: int, seed: int) -> np.ndarray:
    """One Haar-random state vector."""
    return haar_states(dim, 1, seed)[0]


def scan_states(dim: int, n: int, seed: int) -> np.ndarray:
    """Haar-random states on the scan stream (kept apart from initial states)."""
    rng = stream_rng(seed, SCAN_STREAM)
    z = rng.standard_normal((n, dim)) + 1j * rng.standard_normal((n, dim))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


class Hamiltonian:
    """H = sum_k coefficients_k X_k, with cached step propagators.

    The matrix is Hermitian by construction; its projection back onto the
    generator basis is verified so a corrupted generator set is caught
    here rather than mid-simulation.
    """

    def __init__(self, rep: AlgebraRep, coefficients):
        coeff = np.asarray(coefficients, dtype=float)
        if coeff.shape != (rep.dim_algebra,):
            raise ValueError(
                f"coefficients must have shape ({rep.dim_algebra},), got {coeff.shape}"
            )
        matrix = np.tensordot(coeff, rep.generators, axes=(0, 0))
        herm = np.max(np.abs(matrix - matrix.conj().T)) if matrix.size else 0.0
        if herm > 1e-12 * max(1.0, float(np.max(np.abs(matrix)))):
            raise ValueError(f"Hamiltonian is not Hermitian: residual {herm:.3e}")
        back = np.real(
            np.einsum("ab,kba->k", matrix, rep.generators)
        ) / rep.normalization
        resid = float(np.max(np.abs(back - coeff))) if coeff.size else 0.0
        if resid > 1e-10 * max(1.0, float(np.max(np.abs(coeff))) if coeff.size else 1.0):
            raise ValueError(
                f"Hamiltonian does not project back onto its coefficients: {resid:.3e}"
            )
        self.coefficients = coeff
        self.matrix = matrix
        self._propagators: dict[float, np.ndarray] = {}

    @classmethod
    def zero(cls, rep: AlgebraRep) -> "Hamiltonian":
        return cls(rep, np.zeros(rep.dim_algebra))

    @property
    def is_zero(self) -> bool:
        return not np.any(self.coefficients)

    def propagator(self, dt: float) -> np.ndarray:
        """exp(-1j H dt), cached per time step."""
        key = float(dt)
        if key not in self._propagators:
            self._propagators[key] = scipy.linalg.expm(-1j * key * self.matrix)
        return self._propagators[key]


def _as_hamiltonian(h, rep: AlgebraRep) -> Hamiltonian:
    if h is None:
        return Hamiltonian.zero(rep)
    if isinstance(h, Hamiltonian):
        if h.matrix.shape[0] != rep.dim_hilbert:
            raise ValueError("Hamiltonian dimension does not match the representation")
        return h
    return Hamiltonian(rep, h)


@dataclass(frozen=True)
class NoiseConfig:
    """Measurement strength and integration grid.

    gamma >= 0, dt > 0, steps >= 1; gamma * dt <= 0.01 is enforced here
    (and therefore at every simulation entry point) as the explicit-scheme
    stability guard.
    """

    gamma: float
    dt: float
    steps: int
    seed: int

    def __post_init__(self):
        if not np.isfinite(self.gamma) or self.gamma < 0:
            raise ValueError(f"gamma must be finite and nonnegative, got {self.gamma}")
        if not np.isfinite(self.dt) or self.dt <= 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if int(self.steps) != self.steps or self.steps < 1:
            raise ValueError(f"steps must be a positive integer, got {self.steps}")
        if int(self.seed) != self.seed:
            raise ValueError(f"seed must be an integer, got {self.seed}")
        if self.gamma * self.dt > STABILITY_LIMIT * (1 + 1e-12):
            raise ValueError(
                f"gamma * dt = {self.gamma * self.dt:.3g} exceeds the stability "
                f"guard {STABILITY_LIMIT}"
            )


@dataclass(frozen=True)
class TrajectoryRecord:
    """Observables of one unraveled trajectory on a uniform record grid.

    times are k * stride * dt for k = 0..n_rec-1 (the initial state is row
    zero); expectations has one row per record time and one column per
    generator.  states is None unless snapshot storage was requested.
    """

    times: np.ndarray
    uncertainty: np.ndarray
    purity: np.ndarray
    cov_trace_norm: np.ndarray
    drift: np.ndarray
    expectations: np.ndarray
    seed: int
    states: np.ndarray | None = None

    def __post_init__(self):
        dt = np.diff(self.times)
        if self.times.ndim != 1 or len(self.times) < 1:
            raise ValueError("record grid must be a nonempty 1d array")
        if dt.size and (np.any(dt <= 0) or np.max(np.abs(dt - dt[0])) > 1e-9 * dt[0]):
            raise ValueError("record times must increase uniformly")


def _validate_state(psi, dim):
    psi = np.asarray(psi, dtype=complex)
    if psi.shape != (dim,):
        raise ValueError(f"state must have shape ({dim},), got {psi.shape}")
    nrm = np.linalg.norm(psi)
    if abs(nrm - 1.0) > 1e-8:
        raise ValueError(f"state is not normalized: |psi| = {nrm:.12g}")
    return psi / nrm


def _observe_batch(psi, rep, gamma):
    """Per-state localization functionals for a batch of rows.

    Returns (uncertainty, purity, cov_trace_norm, drift, expectations); the
    quadratic-invariant expectation is verified against its constant on
    the way through.
    """
    gens = rep.generators
    y = np.einsum("kab,nb->nka", gens, psi)
    v = np.real(np.einsum("na,nka->nk", psi.conj(), y))
    purity = np.einsum("nk,nk->n", v, v)
    second = np.real(np.einsum("na,ab,nb->n", psi.conj(), rep.casimir_matrix, psi))
    if np.max(np.abs(second - rep.casimir_eigenvalue)) > 1e-10 * max(
        1.0, abs(rep.casimir_eigenvalue)
    ):
        raise RuntimeError(
            "quadratic invariant drifted beyond 1e-10 along the trajectory"
        )
    delta = second - purity
    m = 2.0 * np.real(np.einsum("nka,nla->nkl", y.conj(), y)) - 2.0 * np.einsum(
        "nk,nl->nkl", v, v
    )
    tnorm = np.einsum("nkl,nkl->n", m, m)
    drift = 2.0 * gamma * (rep.adjoint_casimir * purity - tnorm)
    return delta, purity, tnorm, drift, v


def _measurement_update(psi, rep, gamma, dt, noise):
    """Euler-Maruyama measurement substep for a batch; returns the
    unnormalized update.  noise holds the realized increments dxi (n, K)."""
    gens = rep.generators
    y = np.einsum("kab,nb->nka", gens, psi)
    v = np.real(np.einsum("na,nka->nk", psi.conj(), y))
    purity = np.einsum("nk,nk->n", v, v)
    gdt = gamma * dt
    coef = 2.0 * gdt * v + noise
    scal = gdt * purity + np.einsum("nk,nk->n", noise, v)
    out = psi + np.einsum("nk,nka->na", coef, y) - scal[:, None] * psi
    out -= gdt * np.einsum("ab,nb->na", rep.casimir_matrix, psi)
    return out


def _step_batch(psi, rep, gamma, dt, noise, prop=None):
    """One split step for a batch of states: exact Hamiltonian flow, then
    the measurement update, then renormalization."""
    if prop is not None:
        psi = psi @ prop.T
    out = _measurement_update(psi, rep, gamma, dt, noise)
    nrm = np.sqrt(np.real(np.einsum("na,na->n", out.conj(), out)))
    if not np.all(np.isfinite(nrm)) or np.any(nrm <= 0):
        raise RuntimeError("integration blow-up: state norm left (0, inf); reduce dt")
    return out / nrm[:, None]


def snlse_step(psi, h, rep: AlgebraRep, gamma: float, dt: float, increments):
    """Advance one state by one step given realized noise increments.

    Parameters
    ----------
    psi : (d,) complex array_like, normalized.
    h : Hamiltonian, coefficient vector, or None for free measurement.
    gamma, dt : measurement strength and step; gamma * dt <= 0.01.
    increments : (K,) realized dxi_k for this step (variance 2 gamma dt
        each under the nominal law; any values are accepted).

    Returns
    -------
    (d,) complex ndarray, normalized.
    """
    if gamma < 0 or dt <= 0:
        raise ValueError("gamma must be >= 0 and dt > 0")
    if gamma * dt > STABILITY_LIMIT * (1 + 1e-12):
        raise ValueError(
            f"gamma * dt = {gamma * dt:.3g} exceeds the stability guard {STABILITY_LIMIT}"
        )
    psi = _validate_state(psi, rep.dim_hilbert)
    ham = _as_hamiltonian(h, rep)
    increments = np.asarray(increments, dtype=float)
    if increments.shape != (rep.dim_algebra,):
        raise ValueError(
            f"increments must have shape ({rep.dim_algebra},), got {increments.shape}"
        )
    prop = None if ham.is_zero else ham.propagator(dt)
    out = _step_batch(psi[None, :], rep, gamma, dt, increments[None, :], prop)
    return out[0]


def _record_grid(steps, stride, dt):
    if stride < 1 or int(stride) != stride:
        raise ValueError(f"record stride must be a positive integer, got {stride}")
    if steps % stride != 0:
        raise ValueError(f"record stride {stride} must divide steps {steps}")
    n_rec = steps // stride + 1
    return n_rec, np.arange(n_rec) * (stride * dt)


def simulate_trajectory(
    initial,
    h,
    rep: AlgebraRep,
    cfg: NoiseConfig,
    record_stride: int = 1,
    store_states: bool = False,
) -> TrajectoryRecord:
    """Integrate one measurement trajectory and record its functionals.

    The trajectory is a deterministic function of (initial, h, rep,
    cfg.seed): noise comes from the Philox stream (cfg.seed, stream 0),
    drawn as one (steps, K) block up front.
    """
    psi = _validate_state(initial, rep.dim_hilbert)
    ham = _as_hamiltonian(h, rep)
    prop = None if ham.is_zero else ham.propagator(cfg.dt)
    n_rec, times = _record_grid(cfg.steps, record_stride, cfg.dt)

    amp = np.sqrt(2.0 * cfg.gamma * cfg.dt)
    noise = amp * stream_rng(cfg.seed, NOISE_STREAM).standard_normal(
        (cfg.steps, rep.dim_algebra)
    )

    rows = np.empty((5, n_rec))
    expect = np.empty((n_rec, rep.dim_algebra))
    snaps = np.empty((n_rec, rep.dim_hilbert), dtype=complex) if store_states else None

    batch = psi[None, :]

    def record(k):
        delta, purity, tnorm, drift, v = _observe_batch(batch, rep, cfg.gamma)
        rows[0, k], rows[1, k], rows[2, k], rows[3, k] = (
            delta[0],
            purity[0],
            tnorm[0],
            drift[0],
        )
        expect[k] = v[0]
        if snaps is not None:
            snaps[k] = batch[0]

    record(0)
    for s in range(cfg.steps):
        batch = _step_batch(batch, rep, cfg.gamma, cfg.dt, noise[s : s + 1], prop)
        if (s + 1) % record_stride == 0:
            record((s + 1) // record_stride)

    return TrajectoryRecord(
        times=times,
        uncertainty=rows[0].copy(),
        purity=rows[1].copy(),
        cov_trace_norm=rows[2].copy(),
        drift=rows[3].copy(),
        expectations=expect,
        seed=cfg.seed,
        states=snaps,
    )


def _thread_count() -> int:
    raw = os.environ.get("GCSLOC_THREADS", "1")
    try:
        n = int(raw)
    except ValueError as err:
        raise ValueError(f"GCSLOC_THREADS must be an integer, got {raw!r}") from err
    return max(1, n)


def _ensemble_blocks(n_traj, block_size):
    starts = list(range(0, n_traj, block_size))
    return [(s, min(s + block_size, n_traj)) for s in starts]


def _run_block(initials, rep, ham, cfg, lo, hi, record_stride, collect):
    """Evolve trajectories lo..hi-1 and return their record-time reduction.

    initials holds one row per trajectory of the whole ensemble.  collect =
    "projector": sum of |psi><psi| per record time, shape (n_rec, d, d).
    collect = "expectations": per-trajectory generator expectations, shape
    (hi - lo, n_rec, K).  collect = "observables": per-trajectory rows
    (uncertainty, purity, cov_trace_norm, drift, <X_1..X_K>), shape
    (hi - lo, n_rec, 4 + K).
    """
    n = hi - lo
    d = rep.dim_hilbert
    prop = None if ham.is_zero else ham.propagator(cfg.dt)
    n_rec, _ = _record_grid(cfg.steps, record_stride, cfg.dt)
    amp = np.sqrt(2.0 * cfg.gamma * cfg.dt)
    gens_rng = [stream_rng(cfg.seed + i, NOISE_STREAM) for i in range(lo, hi)]

    batch = initials[lo:hi].copy()
    if collect == "projector":
        acc = np.zeros((n_rec, d, d), dtype=complex)
    elif collect == "expectations":
        acc = np.empty((n, n_rec, rep.dim_algebra))
    else:
        acc = np.empty((n, n_rec, 4 + rep.dim_algebra))

    def record(k):
        if collect == "projector":
            acc[k] += np.einsum("na,nb->ab", batch, batch.conj())
        elif collect == "expectations":
            _, _, _, _, v = _observe_batch(batch, rep, cfg.gamma)
            acc[:, k, :] = v
        else:
            delta, purity, tnorm, drift, v = _observe_batch(batch, rep, cfg.gamma)
            acc[:, k, 0] = delta
            acc[:, k, 1] = purity
            acc[:, k, 2] = tnorm
            acc[:, k, 3] = drift
            acc[:, k, 4:] = v

    record(0)
    time_chunk = max(1, min(cfg.steps, (1 << 22) // max(1, n * rep.dim_algebra)))
    s = 0
    while s < cfg.steps:
        span = min(time_chunk, cfg.steps - s)
        noise = np.empty((n, span, rep.dim_algebra))
        for i, rng in enumerate(gens_rng):
            noise[i] = rng.standard_normal((span, rep.dim_algebra))
        noise *= amp
        for u in range(span):
            batch = _step_batch(batch, rep, cfg.gamma, cfg.dt, noise[:, u, :], prop)
            if (s + u + 1) % record_stride == 0:
                record((s + u + 1) // record_stride)
        s += span
    return acc


def _run_ensemble(initial, h, rep, cfg, n_traj, record_stride, block_size, collect):
    if n_traj < 1:
        raise ValueError(f"n_traj must be >= 1, got {n_traj}")
    initial = np.asarray(initial, dtype=complex)
    if initial.ndim == 1:
        psi = _validate_state(initial, rep.dim_hilbert)
        initials = np.tile(psi, (n_traj, 1))
    else:
        if initial.shape != (n_traj, rep.dim_hilbert):
            raise ValueError(
                f"per-trajectory initials must have shape ({n_traj}, "
                f"{rep.dim_hilbert}), got {initial.shape}"
            )
        initials = np.stack([_validate_state(row, rep.dim_hilbert) for row in initial])
    ham = _as_hamiltonian(h, rep)
    blocks = _ensemble_blocks(n_traj, block_size)
    n_threads = _thread_count()

    if n_threads > 1 and len(blocks) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            results = list(
                pool.map(
                    lambda b: _run_block(
                        initials, rep, ham, cfg, b[0], b[1], record_stride, collect
                    ),
                    blocks,
                )
            )
    else:
        results = [
            _run_block(initials, rep, ham, cfg, lo, hi, record_stride, collect)
            for lo, hi in blocks
        ]

    n_rec, times = _record_grid(cfg.steps, record_stride, cfg.dt)
    if collect == "projector":
        total = np.zeros_like(results[0])
        for r in results:  # fixed block order keeps the reduction deterministic
            total += r
        return times, total / n_traj
    return times, np.concatenate(results, axis=0)


def ensemble_average(
    initial,
    h,
    rep: AlgebraRep,
    cfg: NoiseConfig,
    n_traj: int,
    record_stride: int = 1,
    block_size: int = DEFAULT_BLOCK,
):
    """Mean projector over n_traj independent trajectories.

    Trajectory i uses seed cfg.seed + i.  Returns (times, rho) with rho of
    shape (n_rec, d, d); each row is Hermitian with unit trace by
    construction.  Blocks of `block_size` trajectories are integrated
    together and reduced in fixed order, so the result does not depend on
    the thread count (GCSLOC_THREADS).
    """
    return _run_ensemble(
        initial, h, rep, cfg, n_traj, record_stride, block_size, "projector"
    )


def ensemble_expectations(
    initial,
    h,
    rep: AlgebraRep,
    cfg: NoiseConfig,
    n_traj: int,
    record_stride: int = 1,
    block_size: int = DEFAULT_BLOCK,
):
    """Per-trajectory generator expectations at the record times.

    Returns (times, values) with values of shape (n_traj, n_rec, K); used
    for unraveling statistics (means and standard errors across
    trajectories).  `initial` may be one state vector shared by all
    trajectories or an (n_traj, d) array of per-trajectory starts.
    """
    return _run_ensemble(
        initial, h, rep, cfg, n_traj, record_stride, block_size, "expectations"
    )


def ensemble_observables(
    initial,
    h,
    rep: AlgebraRep,
    cfg: NoiseConfig,
    n_traj: int,
    record_stride: int = 1,
    block_size: int = DEFAULT_BLOCK,
):
    """Per-trajectory localization functionals at the record times.

    Returns (times, rows) with rows of shape (n_traj, n_rec, 4 + K):
    uncertainty, purity, squared covariance norm, drift, then the K
    generator expectations.  `initial` may be one state vector or an
    (n_traj, d) array of per-trajectory starts; trajectory i draws noise
    from seed cfg.seed + i either way.
    """
    return _run_ensemble(
        initial, h, rep, cfg, n_traj, record_stride, block_size, "observables"
    )


def validate_density(rho, dim=None, herm_tol=1e-10, trace_tol=1e-10, eig_floor=-1e-8):
    """Check Hermiticity, unit trace, and near-positivity of a density matrix."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"density matrix must be square, got {rho.shape}")
    if dim is not None and rho.shape[0] != dim:
        raise ValueError(f"density matrix must be {dim} x {dim}, got {rho.shape}")
    herm = float(np.max(np.abs(rho - rho.conj().T)))
    if herm > herm_tol:
        raise ValueError(f"density matrix not Hermitian: residual {herm:.3e}")
    tr = complex(np.trace(rho))
    if abs(tr - 1.0) > trace_tol:
        raise ValueError(f"density matrix trace {tr:.12g} != 1")
    low = float(np.min(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))))
    if low < eig_floor:
        raise ValueError(f"density matrix negativity {low:.3e} below {eig_floor:.0e}")
    return rho


def _lindblad_rhs(rho, hmat, gens, cas, gamma, have_h):
    out = -gamma * (
        cas @ rho + rho @ cas - 2.0 * np.einsum("kab,bc,kdc->ad", gens, rho, gens.conj())
    )
    if have_h:
        out = out - 1j * (hmat @ rho - rho @ hmat)
    return out


def lindblad_step(rho, h, rep: AlgebraRep, gamma: float, dt: float):
    """One RK4 step of the double-commutator master equation.

    The output is symmetrized; trace preservation is checked to 1e-12 and
    the most negative eigenvalue must stay above -1e-6, otherwise the step
    is rejected as too large.
    """
    rho = np.asarray(rho, dtype=complex)
    ham = _as_hamiltonian(h, rep)
    gens = rep.generators
    cas = rep.casimir_matrix
    have_h = not ham.is_zero
    hmat = ham.matrix

    k1 = _lindblad_rhs(rho, hmat, gens, cas, gamma, have_h)
    k2 = _lindblad_rhs(rho + 0.5 * dt * k1, hmat, gens, cas, gamma, have_h)
    k3 = _lindblad_rhs(rho + 0.5 * dt * k2, hmat, gens, cas, gamma, have_h)
    k4 = _lindblad_rhs(rho + dt * k3, hmat, gens, cas, gamma, have_h)
    out = rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    out = 0.5 * (out + out.conj().T)

    tr_drift = abs(complex(np.trace(out)) - complex(np.trace(rho)))
    if tr_drift > 1e-12:
        raise RuntimeError(f"trace drifted by {tr_drift:.3e} in one step")
    low = float(np.min(np.linalg.eigvalsh(out)))
    if low < -1e-6:
        raise RuntimeError(
            f"density matrix negativity {low:.3e}: step too large for positivity"
        )
    return out


def lindblad_evolve(
    rho0, h, rep: AlgebraRep, gamma: float, dt: float, steps: int, record_stride: int = 1
):
    """RK4 evolution of the master equation on a uniform record grid.

    Returns (times, rhos) with rhos of shape (n_rec, d, d), row 0 the
    initial matrix.
    """
    rho = validate_density(rho0, rep.dim_hilbert)
    n_rec, times = _record_grid(steps, record_stride, dt)
    out = np.empty((n_rec, rep.dim_hilbert, rep.dim_hilbert), dtype=complex)
    out[0] = rho
    for s in range(steps):
        rho = lindblad_step(rho, h, rep, gamma, dt)
        if (s + 1) % record_stride == 0:
            out[(s + 1) // record_stride] = rho
    return times, out


def lindblad_superoperator(h, rep: AlgebraRep, gamma: float) -> np.ndarray:
    """Dense (d^2, d^2) generator of the master equation flow.

    Uses the row-major vectorization vec(rho)[i*d + j] = rho[i, j], under
    which A rho B maps to (A kron B^T) vec(rho).
    """
    d = rep.dim_hilbert
    if d * d > 64:
        raise ValueError(
            f"superoperator construction is limited to d^2 <= 64, got d = {d}"
        )
    ham = _as_hamiltonian(h, rep)
    eye = np.eye(d)
    sup = np.zeros((d * d, d * d), dtype=complex)
    if not ham.is_zero:
        sup -= 1j * (np.kron(ham.matrix, eye) - np.kron(eye, ham.matrix.T))
    cas = rep.casimir_matrix
    sup -= gamma * (np.kron(cas, eye) + np.kron(eye, cas.T))
    for x in rep.generators:
        sup += 2.0 * gamma * np.kron(x, x.T)
    return sup


def lindblad_expm_evolve(rho0, h, rep: AlgebraRep, gamma: float, times):
    """Exact master-equation flow rho(t) = expm(L t) rho0 at the given times."""
    rho0 = validate_density(rho0, rep.dim_hilbert)
    d = rep.dim_hilbert
    sup = lindblad_superoperator(h, rep, gamma)
    times = np.asarray(times, dtype=float)
    out = np.empty((len(times), d, d), dtype=complex)
    for i, t in enumerate(times):
        out[i] = (scipy.linalg.expm(sup * t) @ rho0.reshape(-1)).reshape(d, d)
    return out
