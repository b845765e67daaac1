"""Closed and dissipative phonon dynamics.

Closed evolution propagates a pure state through the Hamiltonian's
eigendecomposition.  Dissipative evolution integrates the thermal Lindblad
master equation

    drho/dt = -i [H, rho]
              + sum_n (gamma_n/2) n_th_n (2 a' rho a - a a' rho - rho a a')
              + sum_n (gamma_n/2) (n_th_n + 1) (2 a rho a' - a' a rho - rho a' a)

through its sparse superoperator representation; steady states come from
inverse-power iteration on the shifted superoperator with a sparse LU
factorization (dense null-space fallback for small systems).
"""

from __future__ import annotations

import math
import numbers
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.integrate import solve_ivp

from .fock import (
    DensityMatrix,
    DimensionError,
    Operator,
    StateVector,
    destroy,
    hermitian_eig,
    partial_trace,
)

__all__ = [
    "StiffnessError",
    "ConvergenceError",
    "DegenerateSteadyStateError",
    "Trajectory",
    "Liouvillian",
    "evolve_closed",
    "model1_amplitudes_analytic",
    "build_liouvillian",
    "evolve_master",
    "steady_state",
    "thermal_occupation",
    "truncation_fidelity",
    "converged_steady_state",
]


class StiffnessError(RuntimeError):
    """The adaptive integrator underflowed its step size."""


class ConvergenceError(RuntimeError):
    """An iterative solve did not reach its tolerance."""


class DegenerateSteadyStateError(RuntimeError):
    """The Liouvillian null space appears to be more than one dimensional."""


@dataclass
class Trajectory:
    """Time grid plus state snapshots (pure or mixed) and solver statistics."""

    times: np.ndarray
    states: list
    stats: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if len(self.states) != self.times.size:
            raise ValueError(
                f"snapshot count {len(self.states)} != time grid length {self.times.size}"
            )

    @property
    def dims(self):
        return self.states[0].dims

    def probability(self, label) -> np.ndarray:
        """Series of Fock-state occupation probabilities P(label) over time."""
        out = np.empty(self.times.size)
        for i, s in enumerate(self.states):
            if isinstance(s, StateVector):
                out[i] = s.probability(label)
            else:
                idx = _flat_label(s.dims, label)
                out[i] = s.data[idx, idx].real
        return out


def _flat_label(dims, label) -> int:
    if isinstance(label, numbers.Integral):
        label = (int(label),)
    label = tuple(int(i) for i in label)
    if len(label) != len(dims):
        raise DimensionError(f"label {label} does not match {len(dims)} modes")
    flat = 0
    for i, d in zip(label, dims):
        if not 0 <= i < d:
            raise DimensionError(f"label {label} outside cutoffs {tuple(dims)}")
        flat = flat * d + i
    return flat


def evolve_closed(h: Operator, psi0: StateVector, times) -> Trajectory:
    """Propagate |psi(t)> = V exp(-i E t) V' |psi0> on the given time grid.

    Uses the Hermitian eigendecomposition of ``h``; the norm of every
    snapshot is verified to 1e-10.
    """
    if h.dims != psi0.dims:
        raise DimensionError(f"dims mismatch: H {h.dims} vs state {psi0.dims}")
    times = np.asarray(times, dtype=float)
    evals, evecs = hermitian_eig(h)
    c0 = evecs.conj().T @ psi0.data
    states = []
    for t in times:
        psi = evecs @ (np.exp(-1j * evals * t) * c0)
        states.append(StateVector(psi, psi0.dims, norm_tol=1e-10))
    return Trajectory(times, states, stats={"propagation": "eigendecomposition"})


def model1_amplitudes_analytic(f: float, j: float, t):
    """Closed-form two-qubit amplitudes for the doubly-resonant model started
    from the two-mode vacuum with equal drives.

    Returns ``(c00, c01, c10, c11)``; each is a scalar or array matching ``t``.
    """
    t = np.asarray(t, dtype=float)
    c00 = 0.25 * np.exp(-1j * (2 * f + j) * t) * (
        1.0 + np.exp(4j * f * t) + 2.0 * np.exp(2j * (f + j) * t)
    )
    c01 = -0.5j * np.exp(-1j * j * t) * np.sin(2 * f * t)
    c11 = c00 - np.exp(1j * j * t)
    return c00, c01, c01.copy(), c11


def _mode_ops_sparse(dims):
    """Sparse annihilation operator for each mode, embedded in the full space."""
    ops = []
    for n, d in enumerate(dims):
        factors = [sp.identity(dk, format="csr", dtype=complex) for dk in dims]
        factors[n] = sp.csr_matrix(destroy(d).data)
        full = factors[0]
        for fct in factors[1:]:
            full = sp.kron(full, fct, format="csr")
        ops.append(full)
    return ops


def _spre(a, eye):
    return sp.kron(a, eye, format="csr")


def _spost(b, eye):
    return sp.kron(eye, b.T, format="csr")


class Liouvillian:
    """Sparse superoperator for the thermal Lindblad master equation.

    Acts on row-major vectorized density matrices: ``vec(A rho B) =
    (A kron B^T) vec(rho)``.  Immutable after assembly.
    """

    __slots__ = ("dims", "matrix", "gamma", "n_th")

    def __init__(self, dims, matrix, gamma, n_th):
        self.dims = tuple(dims)
        self.matrix = matrix.tocsr()
        self.gamma = tuple(gamma)
        self.n_th = tuple(n_th)

    @property
    def dim(self) -> int:
        """Hilbert-space (not superoperator) dimension."""
        d = 1
        for k in self.dims:
            d *= k
        return d

    def apply(self, rho) -> np.ndarray:
        """Right-hand side drho/dt for a density matrix (or raw matrix)."""
        m = rho.data if isinstance(rho, Operator) else np.asarray(rho, dtype=complex)
        d = self.dim
        return (self.matrix @ m.reshape(d * d)).reshape(d, d)

    def max_entry(self) -> float:
        data = self.matrix.data
        return float(np.abs(data).max()) if data.size else 0.0

    def __repr__(self):
        return f"Liouvillian(dims={self.dims}, gamma={self.gamma}, n_th={self.n_th})"


def build_liouvillian(h: Operator, gamma, n_th) -> Liouvillian:
    """Assemble the sparse master-equation superoperator for Hamiltonian ``h``
    with per-mode decay rates ``gamma`` and thermal occupations ``n_th``.
    """
    n_modes = len(h.dims)
    if isinstance(gamma, numbers.Number):
        gamma = (float(gamma),) * n_modes
    if isinstance(n_th, numbers.Number):
        n_th = (float(n_th),) * n_modes
    gamma = tuple(float(g) for g in gamma)
    n_th = tuple(float(n) for n in n_th)
    if len(gamma) != n_modes or len(n_th) != n_modes:
        raise DimensionError(
            f"need one gamma and one n_th per mode ({n_modes}), got {len(gamma)}/{len(n_th)}"
        )
    if any(g < 0 for g in gamma) or any(n < 0 for n in n_th):
        raise ValueError("gamma and n_th must be >= 0")
    if not h.is_hermitian(1e-10):
        raise ValueError("Hamiltonian must be Hermitian")

    d = h.dim
    eye = sp.identity(d, format="csr", dtype=complex)
    hs = sp.csr_matrix(h.data)
    lv = -1j * (_spre(hs, eye) - _spost(hs, eye))
    for a, g, nth in zip(_mode_ops_sparse(h.dims), gamma, n_th):
        if g == 0.0:
            continue
        ad = a.conj().T.tocsr()
        for c, rate in ((a, g * (nth + 1.0)), (ad, g * nth)):
            if rate == 0.0:
                continue
            cd = c.conj().T.tocsr()
            cdc = (cd @ c).tocsr()
            lv = lv + rate * (
                sp.kron(c, cd.T, format="csr")
                - 0.5 * _spre(cdc, eye)
                - 0.5 * _spost(cdc, eye)
            )
    return Liouvillian(h.dims, lv, gamma, n_th)


def evolve_master(lv: Liouvillian, rho0: DensityMatrix, times, *,
                  rtol: float = 1e-8, atol: float = 1e-12,
                  method: str = "RK45") -> Trajectory:
    """Integrate the master equation with adaptive step-size control.

    Snapshots are validated against trace preservation (1e-8), Hermiticity
    (1e-9) and positivity (-1e-7).
    """
    if rho0.dims != lv.dims:
        raise DimensionError(f"dims mismatch: Liouvillian {lv.dims} vs rho0 {rho0.dims}")
    times = np.asarray(times, dtype=float)
    if times.size < 2 or np.any(np.diff(times) <= 0):
        raise ValueError("time grid must be ascending with at least two points")
    d = lv.dim
    mat = lv.matrix

    def rhs(_t, y):
        return mat @ y

    sol = solve_ivp(rhs, (times[0], times[-1]), rho0.data.reshape(d * d),
                    t_eval=times, method=method, rtol=rtol, atol=atol)
    if not sol.success:
        raise StiffnessError(
            f"integrator failed: {sol.message}; consider a smaller cutoff, looser "
            "tolerance, or an implicit method"
        )
    states = [
        DensityMatrix(sol.y[:, i].reshape(d, d), lv.dims,
                      herm_tol=1e-9, trace_tol=1e-8, pos_tol=1e-7)
        for i in range(times.size)
    ]
    stats = {"propagation": "master-equation", "method": method,
             "rtol": rtol, "atol": atol, "nfev": int(sol.nfev)}
    return Trajectory(times, states, stats=stats)


def _null_vector_dense(lv: Liouvillian, degeneracy_tol: float):
    mat = lv.matrix.toarray()
    u, s, vh = np.linalg.svd(mat)
    thresh = degeneracy_tol * max(1.0, float(s[0]))
    if s.size > 1 and s[-2] <= thresh:
        raise DegenerateSteadyStateError(
            f"two near-zero singular values ({s[-2]:.3e}, {s[-1]:.3e}); "
            "the steady state is not unique"
        )
    return vh[-1].conj()


def _finalize_steady(lv: Liouvillian, vec: np.ndarray, residual_factor: float,
                     info: dict) -> DensityMatrix:
    d = lv.dim
    rho = vec.reshape(d, d)
    rho = (rho + rho.conj().T) / 2.0
    tr = np.trace(rho).real
    if abs(tr) < 1e-300:
        raise ConvergenceError("steady-state candidate has zero trace")
    rho = rho / tr
    residual = float(np.abs(lv.matrix @ rho.reshape(d * d)).max())
    scale = lv.max_entry()
    if residual > residual_factor * max(scale, 1e-300):
        raise ConvergenceError(
            f"steady-state residual {residual:.3e} exceeds "
            f"{residual_factor:.1e} * |L|_max = {residual_factor * scale:.3e}"
        )
    info["residual"] = residual
    out = DensityMatrix(rho, lv.dims, validate=False)
    info["purity"] = out.purity()
    return out


def steady_state(lv: Liouvillian, *, shift: float = 1e-8, tol: float = 1e-12,
                 max_iter: int = 200, method: str = "auto",
                 check_unique: bool = True, degeneracy_tol: float = 1e-8,
                 residual_factor: float = 1e-10,
                 info: dict | None = None) -> DensityMatrix:
    """Solve L(rho) = 0 for the unique stationary density matrix.

    Inverse-power iteration on (L - shift*I) with a sparse LU factorization,
    started from the maximally mixed state, iterated until the Hermitized,
    trace-normalized candidate changes by less than ``tol`` entrywise.  A
    dense SVD null-space route is used as a fallback (or on request via
    ``method='dense'``) for Hilbert dimensions up to 60.

    ``check_unique`` runs a second, deflated inverse-power pass and raises
    :class:`DegenerateSteadyStateError` if it too sits in the null space.
    """
    if info is None:
        info = {}
    d = lv.dim
    if method not in ("auto", "power", "dense"):
        raise ValueError(f"unknown method {method!r}")
    if method == "dense":
        if d > 60:
            raise ValueError("dense steady-state route is limited to dimension <= 60")
        vec = _null_vector_dense(lv, degeneracy_tol)
        info["method"] = "dense-svd"
        return _finalize_steady(lv, vec, residual_factor, info)

    shifted = (lv.matrix - shift * sp.identity(d * d, format="csr", dtype=complex)).tocsc()
    try:
        lu = spla.splu(shifted)
    except RuntimeError as exc:  # singular factorization
        if method == "auto" and d <= 60:
            vec = _null_vector_dense(lv, degeneracy_tol)
            info["method"] = "dense-svd"
            return _finalize_steady(lv, vec, residual_factor, info)
        raise ConvergenceError(f"sparse LU factorization failed: {exc}") from exc

    rho = (np.eye(d, dtype=complex) / d)
    prev = None
    converged = False
    for it in range(1, max_iter + 1):
        w = lu.solve(rho.reshape(d * d))
        m = w.reshape(d, d)
        m = (m + m.conj().T) / 2.0
        tr = np.trace(m).real
        if abs(tr) < 1e-300:
            break
        m = m / tr
        if prev is not None and np.abs(m - prev).max() < tol:
            converged = True
            rho = m
            break
        prev = m
        rho = m
    info["iterations"] = it
    if not converged:
        if method == "auto" and d <= 60:
            vec = _null_vector_dense(lv, degeneracy_tol)
            info["method"] = "dense-svd"
            return _finalize_steady(lv, vec, residual_factor, info)
        raise ConvergenceError(f"inverse-power iteration did not converge in {max_iter} steps")

    if check_unique:
        v1 = rho.reshape(d * d)
        v1 = v1 / np.linalg.norm(v1)
        rng = np.random.default_rng(0)
        v2 = rng.standard_normal(d * d) + 1j * rng.standard_normal(d * d)
        for _ in range(5):
            v2 = v2 - (v1.conj() @ v2) * v1
            v2 = v2 / np.linalg.norm(v2)
            v2 = lu.solve(v2)
        v2 = v2 - (v1.conj() @ v2) * v1
        v2 = v2 / np.linalg.norm(v2)
        sigma2 = float(np.linalg.norm(lv.matrix @ v2))
        info["second_mode_residual"] = sigma2
        if sigma2 <= degeneracy_tol * max(1.0, lv.max_entry()):
            raise DegenerateSteadyStateError(
                f"a second null-space direction was found (residual {sigma2:.3e}); "
                "the steady state is not unique"
            )
    info["method"] = "inverse-power"
    return _finalize_steady(lv, rho.reshape(d * d), residual_factor, info)


def thermal_occupation(omega: float, temperature: float, *, k_b: float = 1.0) -> float:
    """Bose-Einstein occupation 1 / (exp(omega / (k_b T)) - 1).

    ``omega`` must be positive; ``temperature`` is in the same units with
    ``k_b`` defaulting to 1 (set it for SI inputs).  T = 0 returns 0.
    """
    if omega <= 0:
        raise ValueError(f"omega must be positive, got {omega}")
    if temperature < 0:
        raise ValueError(f"temperature must be >= 0, got {temperature}")
    if temperature == 0:
        return 0.0
    return 1.0 / math.expm1(omega / (k_b * temperature))


def truncation_fidelity(traj: Trajectory, subspace) -> np.ndarray:
    """Per-snapshot total probability inside a set of Fock labels.

    ``subspace`` is an iterable of (m1, m2) labels (ints for single mode).
    The result lies in [0, 1] and equals 1 when the subspace is the full
    space.
    """
    labels = list(subspace)
    out = np.zeros(traj.times.size)
    for lbl in labels:
        out += traj.probability(lbl)
    return out


def converged_steady_state(builder, cutoffs, gamma, n_th, *,
                           drift_tol: float = 1e-3, step: int = 2,
                           max_rounds: int = 3, **ss_kwargs):
    """Steady state with a cutoff-convergence sweep.

    ``builder(dims) -> Operator`` constructs the Hamiltonian at given
    cutoffs.  The steady state is computed at ``cutoffs`` and again with
    every cutoff raised by ``step``; if purities and common-block Fock
    probabilities move by less than ``drift_tol`` the larger-cutoff result
    is returned together with the sweep evidence, otherwise the sweep
    escalates (up to ``max_rounds``).

    Returns
    -------
    (rho, sweep) : (DensityMatrix, list of dict)
    """
    def observables(rho):
        obs = {"purity": rho.purity()}
        if len(rho.dims) == 2:
            obs["purity_mode1"] = partial_trace(rho, 1).purity()
            obs["purity_mode2"] = partial_trace(rho, 2).purity()
        obs["probs"] = np.diag(rho.data).real.reshape(rho.dims)
        return obs

    dims = tuple(int(c) for c in cutoffs)
    sweep = []
    rho_a = None
    for _ in range(max_rounds):
        dims_b = tuple(d + step for d in dims)
        if rho_a is None:
            info_a = {}
            rho_a = steady_state(build_liouvillian(builder(dims), gamma, n_th),
                                 info=info_a, **ss_kwargs)
        info_b = {}
        rho_b = steady_state(build_liouvillian(builder(dims_b), gamma, n_th),
                             info=info_b, **ss_kwargs)
        oa, ob = observables(rho_a), observables(rho_b)
        block = tuple(slice(0, d) for d in dims)
        drift = max(
            abs(oa["purity"] - ob["purity"]),
            abs(oa.get("purity_mode1", 0.0) - ob.get("purity_mode1", 0.0)),
            abs(oa.get("purity_mode2", 0.0) - ob.get("purity_mode2", 0.0)),
            float(np.abs(oa["probs"] - ob["probs"][block]).max()),
        )
        sweep.append({
            "cutoffs": list(dims), "cutoffs_next": list(dims_b),
            "purity": oa["purity"], "purity_next": ob["purity"],
            "max_drift": drift, "converged": drift < drift_tol,
            "residual": info_b.get("residual"),
        })
        if drift < drift_tol:
            return rho_b, sweep
        dims, rho_a = dims_b, rho_b
    raise ConvergenceError(
        f"steady-state observables still drift by {sweep[-1]['max_drift']:.3e} "
        f"after {max_rounds} cutoff increases (tolerance {drift_tol:g})"
    )
