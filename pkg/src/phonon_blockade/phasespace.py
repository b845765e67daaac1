"""s-parametrized quasiprobability distributions in the Fock representation.

The family interpolates between the Husimi function (s = -1), the Wigner
function (s = 0) and, in the excluded limit s = 1, the singular P function.
Values come from the kernel matrix elements

    <l|T(s, alpha)|k> = c sqrt(l!/k!) y^(k-l+1) z^l conj(alpha)^(k-l)
                        L_l^(k-l)(x_alpha),     for k >= l,

with c = exp(-2|alpha|^2/(1-s))/pi, x_alpha = 4|alpha|^2/(1-s^2),
y = 2/(1-s), z = (s+1)/(s-1), completed to k < l by Hermitian symmetry.
The s = -1 endpoint is evaluated through its own (coherent-projector) limit
because x_alpha and z degenerate there.  Decreasing s convolves the
distribution with a Gaussian, which is also available as a grid operation.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import fftconvolve
from scipy.special import eval_genlaguerre, gammaln

from .fock import DensityMatrix, DimensionError

__all__ = [
    "PhaseSpaceDomainError",
    "NumericalConsistencyError",
    "PhaseGrid",
    "QPDGrid",
    "qpd_matrix_element",
    "qpd_point",
    "qpd_grid",
    "qpd_two_mode",
    "gaussian_smooth",
]


class PhaseSpaceDomainError(ValueError):
    """The order parameter s is outside [-1, 1)."""


class NumericalConsistencyError(RuntimeError):
    """A quantity that must be real came out with a large imaginary part."""


def _check_s(s: float) -> float:
    s = float(s)
    if not -1.0 <= s < 1.0:
        raise PhaseSpaceDomainError(f"s must lie in [-1, 1), got {s}")
    return s


@dataclass(frozen=True)
class PhaseGrid:
    """Rectangular sampling window for alpha = q + i p with one step size."""

    re_min: float
    re_max: float
    im_min: float
    im_max: float
    step: float
    s: float = 0.0

    def __post_init__(self):
        _check_s(self.s)
        if not (self.step > 0 and math.isfinite(self.step)):
            raise ValueError(f"step must be positive and finite, got {self.step}")
        for v in (self.re_min, self.re_max, self.im_min, self.im_max):
            if not math.isfinite(v):
                raise ValueError("grid ranges must be finite")
        if self.re_max <= self.re_min or self.im_max <= self.im_min:
            raise ValueError("grid ranges must be nonempty")

    @classmethod
    def square(cls, half_extent: float, step: float, s: float = 0.0) -> "PhaseGrid":
        return cls(-half_extent, half_extent, -half_extent, half_extent, step, s)

    @property
    def re_axis(self) -> np.ndarray:
        n = int(round((self.re_max - self.re_min) / self.step)) + 1
        return self.re_min + self.step * np.arange(n)

    @property
    def im_axis(self) -> np.ndarray:
        n = int(round((self.im_max - self.im_min) / self.step)) + 1
        return self.im_min + self.step * np.arange(n)

    def alphas(self) -> np.ndarray:
        """Complex sample points, shape (n_re, n_im)."""
        return self.re_axis[:, None] + 1j * self.im_axis[None, :]


@dataclass(frozen=True)
class QPDGrid:
    """Sampled distribution values over a :class:`PhaseGrid`.

    ``values[i, j]`` is the distribution at ``re_axis[i] + 1j * im_axis[j]``.
    ``norm`` records the Riemann sum values.sum() * step^2, which approaches 1
    on windows capturing the state's phase-space mass; ``norm_tol`` is the
    declared quadrature tolerance of the grid.
    """

    grid: PhaseGrid
    values: np.ndarray
    norm: float = field(default=float("nan"))
    norm_tol: float = 1e-4

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if not np.all(np.isfinite(vals)):
            raise ValueError("QPD samples must be finite")
        expected = (self.grid.re_axis.size, self.grid.im_axis.size)
        if vals.shape != expected:
            raise ValueError(f"values shape {vals.shape} != grid shape {expected}")
        object.__setattr__(self, "values", vals)
        if math.isnan(self.norm):
            object.__setattr__(self, "norm", float(vals.sum() * self.grid.step ** 2))

    @property
    def s(self) -> float:
        return self.grid.s

    def min(self) -> float:
        return float(self.values.min())


def _element_general(l: int, k: int, alpha, s: float):
    """<l|T(s)|k> for k >= l and -1 < s < 1, vectorized over alpha."""
    alpha = np.asarray(alpha, dtype=complex)
    aa = np.abs(alpha) ** 2
    c = np.exp(-2.0 * aa / (1.0 - s)) / np.pi
    x = 4.0 * aa / (1.0 - s * s)
    y = 2.0 / (1.0 - s)
    z = (s + 1.0) / (s - 1.0)
    fac = math.exp(0.5 * (gammaln(l + 1) - gammaln(k + 1)))
    if k == l:
        mono = 1.0
    else:
        mono = np.conj(alpha) ** (k - l)  # exact 0 at alpha = 0
    return c * fac * y ** (k - l + 1) * (z ** l) * mono * eval_genlaguerre(l, k - l, x)


def _element_husimi(l: int, k: int, alpha):
    """s = -1 limit: <l|T|k> = exp(-|alpha|^2) conj(alpha)^k alpha^l / (pi sqrt(k! l!))."""
    alpha = np.asarray(alpha, dtype=complex)
    aa = np.abs(alpha) ** 2
    fac = math.exp(-0.5 * (gammaln(k + 1) + gammaln(l + 1)))
    return np.exp(-aa) / np.pi * fac * np.conj(alpha) ** k * alpha ** l


def qpd_matrix_element(l: int, k: int, alpha, s: float):
    """Kernel matrix element <l|T(s)(alpha)|k>, any index order, s in [-1, 1).

    Stable for large indices: factorial ratios are evaluated in the log
    domain and the associated Laguerre polynomial by library recurrence.
    """
    s = _check_s(s)
    l, k = int(l), int(k)
    if l < 0 or k < 0:
        raise ValueError(f"Fock indices must be >= 0, got ({l}, {k})")
    if k < l:
        return np.conj(qpd_matrix_element(k, l, alpha, s))
    if s == -1.0:
        return _element_husimi(l, k, alpha)
    return _element_general(l, k, alpha, s)


def _kernel_matrix(alpha: complex, dim: int, s: float) -> np.ndarray:
    t = np.empty((dim, dim), dtype=complex)
    for l in range(dim):
        for k in range(l, dim):
            v = qpd_matrix_element(l, k, alpha, s)
            t[l, k] = v
            t[k, l] = np.conj(v)
    return t


def _qpd_values(rho: np.ndarray, alpha, s: float, imag_tol: float):
    """Sum_{k,l} rho[k,l] <l|T|k> vectorized over alpha; checks realness."""
    d = rho.shape[0]
    w = np.zeros(np.shape(alpha), dtype=complex)
    for l in range(d):
        for k in range(d):
            if abs(rho[k, l]) == 0.0:
                continue
            w = w + rho[k, l] * qpd_matrix_element(l, k, alpha, s)
    resid = float(np.abs(w.imag).max()) if w.size else 0.0
    if resid > imag_tol:
        raise NumericalConsistencyError(
            f"imaginary residue {resid:.3e} exceeds {imag_tol:.1e}; "
            "the input is not a valid Hermitian state"
        )
    return w.real, resid


def qpd_point(rho: DensityMatrix, alpha: complex, s: float, *,
              imag_tol: float = 1e-8) -> float:
    """Distribution value of a single-mode state at one phase-space point."""
    if len(rho.dims) != 1:
        raise DimensionError(f"expected a single-mode state, got dims {rho.dims}")
    val, _ = _qpd_values(rho.data, complex(alpha), _check_s(s), imag_tol)
    return float(val)


def qpd_grid(rho: DensityMatrix, grid: PhaseGrid, *,
             imag_tol: float = 1e-8, norm_tol: float = 1e-4) -> QPDGrid:
    """Sample the distribution of a single-mode state on a rectangular grid."""
    if len(rho.dims) != 1:
        raise DimensionError(f"expected a single-mode state, got dims {rho.dims}")
    vals, _ = _qpd_values(rho.data, grid.alphas(), grid.s, imag_tol)
    return QPDGrid(grid=grid, values=vals, norm_tol=norm_tol)


def qpd_two_mode(rho12: DensityMatrix, alpha1: complex, alpha2: complex, s: float, *,
                 imag_tol: float = 1e-8) -> float:
    """Two-mode distribution value Tr[rho (T(alpha1) kron T(alpha2))].

    Factorizes into the product of single-mode values on product states.
    """
    if len(rho12.dims) != 2:
        raise DimensionError(f"expected a two-mode state, got dims {rho12.dims}")
    s = _check_s(s)
    d1, d2 = rho12.dims
    t1 = _kernel_matrix(complex(alpha1), d1, s)
    t2 = _kernel_matrix(complex(alpha2), d2, s)
    # sum over k1 k2 l1 l2 of rho[(k1 k2), (l1 l2)] T1[l1, k1] T2[l2, k2]
    r = rho12.data.reshape(d1, d2, d1, d2)
    w = complex(np.einsum("abcd,ca,db->", r, t1, t2))
    if abs(w.imag) > imag_tol:
        raise NumericalConsistencyError(
            f"imaginary residue {abs(w.imag):.3e} exceeds {imag_tol:.1e}"
        )
    return float(w.real)


def gaussian_smooth(src: QPDGrid, s: float, *, trunc_tol: float = 1e-3) -> QPDGrid:
    """Convert a distribution of order s0 to a lower order s < s0 by Gaussian
    convolution with kernel 2/(pi (s0-s)) exp(-2|alpha-beta|^2/(s0-s)).

    The convolution is discrete on the source grid; a warning is issued when
    the estimated boundary-truncation error exceeds ``trunc_tol``.
    """
    s = float(s)
    s0 = src.s
    if s >= s0:
        raise ValueError(f"target order s={s} must be smaller than source s0={s0}")
    if s < -1.0:
        raise PhaseSpaceDomainError(f"target order s={s} below -1")
    delta = s0 - s
    step = src.grid.step
    n_re = src.grid.re_axis.size
    n_im = src.grid.im_axis.size
    off_re = step * np.arange(-(n_re - 1), n_re)
    off_im = step * np.arange(-(n_im - 1), n_im)
    kern = (2.0 / (np.pi * delta) * step ** 2
            * np.exp(-2.0 * off_re[:, None] ** 2 / delta)
            * np.exp(-2.0 * off_im[None, :] ** 2 / delta))
    out = fftconvolve(src.values, kern, mode="same")

    # Boundary-truncation estimate: kernel mass beyond half the smaller
    # half-extent, times the largest source magnitude.  Crude but safe for
    # centered states on generous windows.
    half_extent = 0.5 * min(src.grid.re_max - src.grid.re_min,
                            src.grid.im_max - src.grid.im_min)
    margin = 0.5 * half_extent
    bound = float(np.abs(src.values).max() * math.exp(-2.0 * margin ** 2 / delta))
    if bound > trunc_tol:
        warnings.warn(
            f"grid margin may be too small for smoothing by {delta:g}: "
            f"estimated truncation bound {bound:.2e} > {trunc_tol:g}",
            stacklevel=2,
        )
    new_grid = PhaseGrid(src.grid.re_min, src.grid.re_max,
                         src.grid.im_min, src.grid.im_max, step, s)
    return QPDGrid(grid=new_grid, values=out, norm_tol=max(src.norm_tol, bound))
