"""Purity, Fock statistics, entanglement, and nonclassicality measures.

The negativity used throughout is N(rho) = ||rho^PT||_1 - 1, the trace-norm
excess of the partial transpose (twice the summed magnitude of its negative
eigenvalues; a maximally entangled pair of qubits gives N = 1).  The related
quantities are the positive-partial-transpose entanglement cost
log2(N + 1), the entanglement-dimensionality estimate 2 N + 1, and, for
single-mode states, the entanglement potential: the cost measured after
mixing the state with vacuum on a balanced two-mode coupler.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .fock import (
    DensityMatrix,
    DimensionError,
    create,
    destroy,
    hermitian_eig,
    partial_trace,
    partial_transpose,
    tensor,
    trace_norm,
)

__all__ = [
    "MeasureReport",
    "purity",
    "negativity",
    "entanglement_cost",
    "entanglement_dimensionality",
    "entanglement_potential",
    "fock_probabilities",
    "measure_report",
]


def purity(rho: DensityMatrix) -> float:
    """Tr(rho^2), in (0, 1]."""
    return rho.purity()


def negativity(rho: DensityMatrix) -> float:
    """Trace-norm excess of the partial transpose, ||rho^PT||_1 - 1 (>= 0).

    Zero exactly on product states and invariant under local unitaries.
    Computed through the Hermitian eigendecomposition of the partial
    transpose.
    """
    if len(rho.dims) != 2:
        raise DimensionError(f"negativity needs a two-mode state, got dims {rho.dims}")
    n = trace_norm(partial_transpose(rho, 2)) - 1.0
    return max(n, 0.0)


def entanglement_cost(rho: DensityMatrix) -> float:
    """PPT entanglement cost log2(N + 1)."""
    return math.log2(negativity(rho) + 1.0)


def entanglement_dimensionality(rho: DensityMatrix) -> float:
    """Entangled-dimensionality estimate 2 N + 1 (1 for separable states)."""
    return 2.0 * negativity(rho) + 1.0


def _balanced_coupler(d: int) -> np.ndarray:
    """Unitary of the 50:50 two-mode coupler exp(-i H t), H = (a' b + a b')/2,
    at interaction time t = pi/2, on equal cutoffs d."""
    h = 0.5 * (tensor(create(d), destroy(d)) + tensor(destroy(d), create(d)))
    evals, evecs = hermitian_eig(h)
    phase = np.exp(-1j * evals * (np.pi / 2.0))
    return (evecs * phase) @ evecs.conj().T


def entanglement_potential(rho: DensityMatrix) -> float:
    """Nonclassicality of a single-mode state as beam-splitter entanglement.

    The state meets the vacuum on a balanced coupler (ancilla cutoff equal to
    the input cutoff; total excitation number is conserved, so nothing
    leaks); the result is log2(N + 1) of the output two-mode state.  Coherent
    states and their mixtures give zero.
    """
    if len(rho.dims) != 1:
        raise DimensionError(f"entanglement potential needs a single-mode state, got {rho.dims}")
    d = rho.dims[0]
    vac = np.zeros((d, d), dtype=complex)
    vac[0, 0] = 1.0
    rho_in = np.kron(rho.data, vac)
    u = _balanced_coupler(d)
    rho_out = u @ rho_in @ u.conj().T
    out = DensityMatrix(rho_out, (d, d), validate=False)
    return entanglement_cost(out)


def fock_probabilities(rho: DensityMatrix, bounds: tuple[int, int]):
    """Fock occupation statistics of a two-mode state with blockade bounds.

    Parameters
    ----------
    rho : DensityMatrix
        Two-mode state.
    bounds : (int, int)
        Largest retained quantum number per mode; the residual probability
        counts everything outside the block m1 <= bounds[0], m2 <= bounds[1].

    Returns
    -------
    dict with keys ``joint`` (d1 x d2 array), ``mode1``/``mode2`` (reduced
    distributions), ``residual`` (probability outside the bounds) and
    ``bounds``.
    """
    if len(rho.dims) != 2:
        raise DimensionError(f"fock_probabilities needs a two-mode state, got {rho.dims}")
    d1, d2 = rho.dims
    bx, by = int(bounds[0]), int(bounds[1])
    if not (0 <= bx < d1 and 0 <= by < d2):
        raise DimensionError(f"bounds {bounds} exceed cutoffs {rho.dims}")
    joint = np.diag(rho.data).real.reshape(d1, d2)
    p1 = np.diag(partial_trace(rho, 1).data).real
    p2 = np.diag(partial_trace(rho, 2).data).real
    residual = float(1.0 - joint[: bx + 1, : by + 1].sum())
    return {"joint": joint, "mode1": p1, "mode2": p2,
            "residual": residual, "bounds": (bx, by)}


@dataclass
class MeasureReport:
    """Collected state measures for one two-mode state.

    The identities d_ent == 2 * negativity + 1 and
    e_cost == log2(negativity + 1) hold exactly by construction.
    """

    purity_joint: float
    purity_mode1: float
    purity_mode2: float
    negativity: float
    e_cost: float
    d_ent: float
    ep_mode1: float
    ep_mode2: float
    probabilities: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        p = self.probabilities
        return {
            "purity": {"joint": self.purity_joint,
                       "mode1": self.purity_mode1,
                       "mode2": self.purity_mode2},
            "negativity": self.negativity,
            "E_cost": self.e_cost,
            "D_ent": self.d_ent,
            "EP": {"mode1": self.ep_mode1, "mode2": self.ep_mode2},
            "probabilities": {
                "joint": p["joint"].tolist(),
                "mode1": p["mode1"].tolist(),
                "mode2": p["mode2"].tolist(),
                "residual": p["residual"],
                "bounds": list(p["bounds"]),
            },
        }


def measure_report(rho: DensityMatrix, bounds: tuple[int, int]) -> MeasureReport:
    """Compute the full set of measures for a two-mode state."""
    n = negativity(rho)
    r1 = partial_trace(rho, 1)
    r2 = partial_trace(rho, 2)
    return MeasureReport(
        purity_joint=rho.purity(),
        purity_mode1=r1.purity(),
        purity_mode2=r2.purity(),
        negativity=n,
        e_cost=math.log2(n + 1.0),
        d_ent=2.0 * n + 1.0,
        ep_mode1=entanglement_potential(r1),
        ep_mode2=entanglement_potential(r2),
        probabilities=fock_probabilities(rho, bounds),
    )
