"""Parameter derivation and Hamiltonian builders for the coupled nonlinear resonators.

The chain is microscopic rates -> dressed-qubit quantities -> effective
Kerr-model parameters, followed by matrix builders for the effective
Hamiltonian, its two resonance special cases (model 1 and model 2), and the
shifted Kerr family ``K (n - k)(n - l) + E^{kl} n``.

All rates are plain floats in whatever consistent unit system the caller
uses; the reproduction presets work in units of the effective two-mode
coupling J.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .fock import Operator, identity, number, position, tensor

__all__ = [
    "SingularDetuningError",
    "FrameConsistencyError",
    "MicroscopicParams",
    "DressedParams",
    "EffectiveParams",
    "HierarchyReport",
    "derive_dressed",
    "validate_hierarchy",
    "derive_effective",
    "kerr_hamiltonian",
    "build_model1",
    "build_model2",
    "build_heff",
]


class SingularDetuningError(ValueError):
    """Resonator-drive detuning is zero; the dressed-frame derivation is singular."""


class FrameConsistencyError(ValueError):
    """Resonator/qubit drive frequencies are inconsistent with a common rotating frame."""


def _pair(x) -> tuple[float, float]:
    if isinstance(x, (int, float)):
        return (float(x), float(x))
    x = tuple(float(v) for v in x)
    if len(x) != 2:
        raise ValueError(f"expected a scalar or a pair, got {x!r}")
    return x


@dataclass(frozen=True)
class MicroscopicParams:
    """Raw rates of the resonator-qubit hybrid: two driven linear resonators,
    each dispersively coupled to a driven two-level system, plus a
    position-position coupling between the resonators.

    All frequencies/strengths are angular rates in one consistent unit.
    Scalars broadcast to both modes.
    """

    omega_res: tuple[float, float]      # resonator frequencies
    omega_q: tuple[float, float]        # qubit frequencies
    omega_drv: tuple[float, float]      # resonator drive frequencies
    omega_drv_tls: tuple[float, float]  # qubit drive frequencies
    g: tuple[float, float]              # resonator-qubit couplings
    Omega: tuple[float, float]          # qubit drive strengths
    f: tuple[float, float]              # resonator drive strengths
    J12: float                          # bare resonator-resonator coupling
    gamma: tuple[float, float] = (0.0, 0.0)   # resonator decay rates
    n_th: tuple[float, float] = (0.0, 0.0)    # mean thermal occupations

    def __post_init__(self):
        for name in ("omega_res", "omega_q", "omega_drv", "omega_drv_tls",
                     "g", "Omega", "f", "gamma", "n_th"):
            object.__setattr__(self, name, _pair(getattr(self, name)))
        object.__setattr__(self, "J12", float(self.J12))
        if any(v < 0 for v in self.gamma):
            raise ValueError("decay rates gamma must be >= 0")
        if any(v < 0 for v in self.n_th):
            raise ValueError("thermal occupations n_th must be >= 0")


@dataclass(frozen=True)
class DressedParams:
    """Per-mode quantities after moving to the drive frame and diagonalizing
    the driven qubits.

    ``lam`` is the small expansion parameter g'/delta of the dispersive
    treatment; it is NaN when the dispersive splitting ``delta`` vanishes
    (undriven qubit), in which case no Kerr nonlinearity is induced.
    """

    detuning: tuple[float, float]           # resonator-drive detuning
    qubit_detuning: tuple[float, float]     # resonator-qubit detuning
    mixing_angle: tuple[float, float]       # dressed-basis half angle x
    cos2_mixing: tuple[float, float]        # cos^2 x
    dressed_splitting: tuple[float, float]  # sqrt(detuning^2 + Omega^2)
    g_dressed: tuple[float, float]          # g cos^2 x
    delta: tuple[float, float]              # dressed_splitting - detuning
    lam: tuple[float, float]                # g_dressed / delta
    drive_ratio: tuple[float, float]        # Omega / detuning


@dataclass(frozen=True)
class EffectiveParams:
    """Parameters of the effective coupled Kerr oscillators."""

    kerr: tuple[float, float]          # K, the induced Kerr strength per mode
    energy: tuple[float, float]        # effective oscillator energy
    drive: tuple[float, float]         # effective drive strength F
    coupling: float                    # effective two-mode coupling J
    chi: tuple[float, float]           # dispersive shift g' lam (1 - lam^2)
    frame_energy: tuple[float, float]  # energy - omega_drv (rotating frame)
    const_term: tuple[float, float]    # chi / 2, droppable constant


def derive_dressed(p: MicroscopicParams, *, frame_rtol: float = 1e-9) -> DressedParams:
    """Derive the dressed-qubit quantities from microscopic rates.

    Requires a nonzero resonator-drive detuning for each mode and mutually
    consistent rotating-frame frequencies
    (omega_res - omega_q == omega_drv - omega_drv_tls).
    """
    det, det_rq, x, c2, dbar, gp, dlt, lam, r = ([] for _ in range(9))
    for n in range(2):
        rq = p.omega_res[n] - p.omega_q[n]
        rq_drv = p.omega_drv[n] - p.omega_drv_tls[n]
        scale = max(abs(rq), abs(rq_drv), 1.0)
        if abs(rq - rq_drv) > frame_rtol * scale:
            raise FrameConsistencyError(
                f"mode {n + 1}: omega_res - omega_q = {rq} but "
                f"omega_drv - omega_drv_tls = {rq_drv}; the two rotating frames disagree"
            )
        delta_n = p.omega_res[n] - p.omega_drv[n]
        if delta_n == 0.0:
            raise SingularDetuningError(f"mode {n + 1}: resonator-drive detuning is zero")
        x_n = 0.5 * math.atan(p.Omega[n] / delta_n)
        c2_n = math.cos(x_n) ** 2
        dbar_n = math.hypot(delta_n, p.Omega[n])
        gp_n = p.g[n] * c2_n
        dlt_n = dbar_n - delta_n
        lam_n = gp_n / dlt_n if dlt_n != 0.0 else math.nan
        det.append(delta_n)
        det_rq.append(rq)
        x.append(x_n)
        c2.append(c2_n)
        dbar.append(dbar_n)
        gp.append(gp_n)
        dlt.append(dlt_n)
        lam.append(lam_n)
        r.append(p.Omega[n] / delta_n)
    return DressedParams(
        detuning=tuple(det), qubit_detuning=tuple(det_rq), mixing_angle=tuple(x),
        cos2_mixing=tuple(c2), dressed_splitting=tuple(dbar), g_dressed=tuple(gp),
        delta=tuple(dlt), lam=tuple(lam), drive_ratio=tuple(r),
    )


@dataclass(frozen=True)
class HierarchyReport:
    """Advisory report on the dispersive-regime ordering of scales.

    Each entry is a per-mode pair (ratio, passed).  ``passed`` means the
    ratio reaches the chosen margin for the ">>" ordering.  The report never
    blocks a build.
    """

    margin: float
    detuning_over_rabi: tuple          # detuning / Omega >> 1
    rabi_over_coupling: tuple          # Omega / g' >> 1
    dispersive_ratio: tuple            # Omega^2 / (2 g' detuning) >> 1
    frame_resonance_offset: tuple      # |qubit_detuning - dressed_splitting| / dressed_splitting
    passed: bool

    def __str__(self):
        lines = [f"scale hierarchy at margin {self.margin:g}: "
                 f"{'PASS' if self.passed else 'FAIL'}"]
        for n in range(2):
            lines.append(
                f"  mode {n + 1}: detuning/Omega = {self.detuning_over_rabi[n][0]:.4g} "
                f"[{'ok' if self.detuning_over_rabi[n][1] else 'FAIL'}], "
                f"Omega/g' = {self.rabi_over_coupling[n][0]:.4g} "
                f"[{'ok' if self.rabi_over_coupling[n][1] else 'FAIL'}], "
                f"Omega^2/(2 g' detuning) = {self.dispersive_ratio[n][0]:.4g} "
                f"[{'ok' if self.dispersive_ratio[n][1] else 'FAIL'}], "
                f"frame offset = {self.frame_resonance_offset[n]:.3g}"
            )
        return "\n".join(lines)


def validate_hierarchy(d: DressedParams, *, margin: float = 10.0) -> HierarchyReport:
    """Check detuning >> Omega >> g' and Omega^2 >> 2 g' detuning per mode.

    ``margin`` is the factor required for ">>" (default 10).  Also reports
    how far the qubit detuning sits from the dressed splitting, which is the
    resonance condition that makes the dressed interaction time independent.
    """

    def ratio(num, den):
        return num / den if den != 0.0 else math.inf

    dor, roc, disp, off = [], [], [], []
    ok = True
    for n in range(2):
        omega = abs(d.drive_ratio[n] * d.detuning[n])
        r1 = ratio(abs(d.detuning[n]), omega)
        r2 = ratio(omega, abs(d.g_dressed[n]))
        r3 = ratio(omega ** 2, 2.0 * abs(d.g_dressed[n] * d.detuning[n]))
        dor.append((r1, r1 >= margin))
        roc.append((r2, r2 >= margin))
        disp.append((r3, r3 >= margin))
        off.append(abs(d.qubit_detuning[n] - d.dressed_splitting[n])
                   / max(abs(d.dressed_splitting[n]), 1e-300))
        ok = ok and r1 >= margin and r2 >= margin and r3 >= margin
    return HierarchyReport(
        margin=margin, detuning_over_rabi=tuple(dor), rabi_over_coupling=tuple(roc),
        dispersive_ratio=tuple(disp), frame_resonance_offset=tuple(off), passed=ok,
    )


def derive_effective(d: DressedParams, p: MicroscopicParams,
                     *, lam_warn: float = 0.3) -> EffectiveParams:
    """Closed-form effective Kerr parameters from the dressed quantities.

    Per mode: K = -g' lam^3 (equivalently -g'^4/delta^3),
    chi = g' lam (1 - lam^2), energy = omega_res + 2K + chi,
    F = f (1 + lam^2/2); shared J = J12 (1 + lam1^2/2)(1 + lam2^2/2).
    """
    kerr, energy, drive, chi, frame, const = [], [], [], [], [], []
    for n in range(2):
        if d.delta[n] == 0.0 or not math.isfinite(d.lam[n]):
            raise SingularDetuningError(
                f"mode {n + 1}: dispersive splitting is zero, effective parameters undefined"
            )
        lam_n = d.lam[n]
        if abs(lam_n) >= 1.0:
            raise ValueError(
                f"mode {n + 1}: |lam| = {abs(lam_n):.3g} >= 1; the dispersive expansion is invalid"
            )
        if abs(lam_n) > lam_warn:
            warnings.warn(
                f"mode {n + 1}: |lam| = {abs(lam_n):.3g} > {lam_warn}; "
                "third-order truncation may be inaccurate",
                stacklevel=2,
            )
        k_n = -d.g_dressed[n] * lam_n ** 3
        chi_n = d.g_dressed[n] * lam_n * (1.0 - lam_n ** 2)
        e_n = p.omega_res[n] + 2.0 * k_n + chi_n
        kerr.append(k_n)
        chi.append(chi_n)
        energy.append(e_n)
        drive.append(p.f[n] * (1.0 + lam_n ** 2 / 2.0))
        frame.append(d.detuning[n] + 2.0 * k_n + chi_n)
        const.append(chi_n / 2.0)
    coupling = p.J12 * (1.0 + d.lam[0] ** 2 / 2.0) * (1.0 + d.lam[1] ** 2 / 2.0)
    return EffectiveParams(
        kerr=tuple(kerr), energy=tuple(energy), drive=tuple(drive), coupling=coupling,
        chi=tuple(chi), frame_energy=tuple(frame), const_term=tuple(const),
    )


def kerr_hamiltonian(k: int, l: int, kerr: float, energy: float, d: int,
                     *, include_constant: bool = False) -> Operator:
    """Single-mode shifted Kerr Hamiltonian K (n - k)(n - l) + E^{kl} n [- k l K].

    ``energy`` is the base oscillator energy E of the (0, 1) form; the shifted
    form uses E^{kl} = E + (k + l - 1) K internally, so all (k, l) choices
    describe the same physics up to the constant k*l*K, which is dropped by
    default (``include_constant=True`` keeps it, making the family identity
    exact rather than up-to-identity).
    """
    if k < 0 or l < 0:
        raise ValueError(f"shift indices must be >= 0, got ({k}, {l})")
    n_op = number(d)
    eye = identity(d)
    e_kl = energy + (k + l - 1) * kerr
    h = kerr * ((n_op - k * eye) @ (n_op - l * eye)) + e_kl * n_op
    if include_constant:
        h = h - (k * l * kerr) * eye
    return h


def _two_mode_pieces(dims):
    d1, d2 = dims
    n1 = tensor(number(d1), identity(d2))
    n2 = tensor(identity(d1), number(d2))
    x1 = tensor(position(d1), identity(d2))
    x2 = tensor(identity(d1), position(d2))
    xx = tensor(position(d1), position(d2))
    eye = tensor(identity(d1), identity(d2))
    return n1, n2, x1, x2, xx, eye


def build_model1(k1: float, k2: float, f1: float, f2: float, j: float, dims) -> Operator:
    """Both drives on the bare (0-1) resonance: sum_n K_n n(n-1) + F_n (a+a') + J x1 x2."""
    n1, n2, x1, x2, xx, eye = _two_mode_pieces(dims)
    return (k1 * (n1 @ (n1 - eye)) + k2 * (n2 @ (n2 - eye))
            + f1 * x1 + f2 * x2 + j * xx)


def build_model2(k1: float, k2: float, f1: float, f2: float, j: float, dims) -> Operator:
    """Mode 2 driven on the shifted (1, 2) resonance:
    K1 n1(n1-1) + K2 (n2-1)(n2-2) + drives + J x1 x2 (constants dropped)."""
    n1, n2, x1, x2, xx, eye = _two_mode_pieces(dims)
    return (k1 * (n1 @ (n1 - eye)) + k2 * ((n2 - eye) @ (n2 - 2.0 * eye))
            + f1 * x1 + f2 * x2 + j * xx)


def build_heff(e: EffectiveParams, omega_drv, dims) -> Operator:
    """General effective Hamiltonian in the drive rotating frame.

    sum_n [K_n n(n-1) + (E_n - omega_drv_n) n + F_n (a+a')] + J x1 x2.
    Reduces to :func:`build_model1` when omega_drv_n = E_n and to
    :func:`build_model2` (up to a dropped constant) when
    omega_drv_2 = E_2 + 2 K_2.
    """
    w = _pair(omega_drv)
    n1, n2, x1, x2, xx, eye = _two_mode_pieces(dims)
    return (e.kerr[0] * (n1 @ (n1 - eye)) + (e.energy[0] - w[0]) * n1
            + e.kerr[1] * (n2 @ (n2 - eye)) + (e.energy[1] - w[1]) * n2
            + e.drive[0] * x1 + e.drive[1] * x2 + e.coupling * xx)
