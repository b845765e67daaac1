"""Truncated Fock-space operator algebra for one and two phonon modes.

All matrices live in number-state bases with per-mode cutoffs ``d`` (states
|0>, ..., |d-1>).  Two-mode objects use the composite basis |m1, m2> with
``m1`` varying slowest, i.e. flat index ``m1 * d2 + m2``.  Every operation
here is a pure function; :class:`Operator` instances are immutable and safe
to share between threads.
"""

from __future__ import annotations

import numbers

import numpy as np
import scipy.sparse as sp

__all__ = [
    "DimensionError",
    "ResourceLimitError",
    "HermiticityError",
    "Operator",
    "DensityMatrix",
    "StateVector",
    "destroy",
    "create",
    "number",
    "identity",
    "position",
    "fock_state",
    "tensor",
    "partial_trace",
    "partial_transpose",
    "trace_norm",
    "hermitian_eig",
]

# Default tolerances; roughly 100x machine epsilon for matrices up to d ~ 20.
HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-10
POSITIVITY_TOL = 1e-9
NORM_TOL = 1e-12

# Dense storage is authoritative up to this composite dimension; tensor()
# refuses to build anything larger unless the caller raises the limit.
MAX_TENSOR_DIM = 400


class DimensionError(ValueError):
    """A cutoff or mode index is invalid, or matrix shape disagrees with dims."""


class ResourceLimitError(RuntimeError):
    """A requested composite dimension exceeds the configured maximum."""


class HermiticityError(ValueError):
    """An operation requiring a Hermitian matrix received a non-Hermitian one."""


def _as_dims(dims) -> tuple[int, ...]:
    if isinstance(dims, numbers.Integral):
        dims = (int(dims),)
    dims = tuple(int(d) for d in dims)
    if not dims:
        raise DimensionError("dims must contain at least one mode cutoff")
    for d in dims:
        if d < 2:
            raise DimensionError(f"mode cutoff must be >= 2, got {d}")
    return dims


def _composite_dim(dims: tuple[int, ...]) -> int:
    out = 1
    for d in dims:
        out *= d
    return out


class Operator:
    """A complex matrix on a truncated Fock space with mode-dimension metadata.

    Parameters
    ----------
    data : array_like or scipy sparse matrix
        Square complex matrix.  Sparse input is densified (dense storage is
        authoritative for the composite dimensions this package targets).
    dims : int or sequence of int
        Per-mode cutoffs.  Their product must equal the matrix side.
    """

    __slots__ = ("data", "dims")

    def __init__(self, data, dims):
        dims = _as_dims(dims)
        if sp.issparse(data):
            data = data.toarray()
        data = np.asarray(data, dtype=complex)
        if data.ndim != 2 or data.shape[0] != data.shape[1]:
            raise DimensionError(f"operator matrix must be square, got shape {data.shape}")
        side = _composite_dim(dims)
        if data.shape[0] != side:
            raise DimensionError(
                f"matrix side {data.shape[0]} does not match composite dimension "
                f"{side} of dims {dims}"
            )
        data = data.copy()
        data.flags.writeable = False
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "dims", dims)

    def __setattr__(self, name, value):
        raise AttributeError("Operator is immutable")

    @property
    def dim(self) -> int:
        """Composite (matrix-side) dimension."""
        return self.data.shape[0]

    @property
    def n_modes(self) -> int:
        return len(self.dims)

    def dag(self) -> "Operator":
        """Conjugate transpose."""
        return Operator(self.data.conj().T, self.dims)

    def trace(self) -> complex:
        return complex(np.trace(self.data))

    def is_hermitian(self, tol: float = HERMITICITY_TOL) -> bool:
        return bool(np.abs(self.data - self.data.conj().T).max() <= tol)

    def __add__(self, other):
        if isinstance(other, Operator):
            if other.dims != self.dims:
                raise DimensionError(f"dims mismatch: {self.dims} vs {other.dims}")
            return Operator(self.data + other.data, self.dims)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, Operator):
            if other.dims != self.dims:
                raise DimensionError(f"dims mismatch: {self.dims} vs {other.dims}")
            return Operator(self.data - other.data, self.dims)
        return NotImplemented

    def __mul__(self, scalar):
        if isinstance(scalar, numbers.Number):
            return Operator(self.data * scalar, self.dims)
        return NotImplemented

    __rmul__ = __mul__

    def __neg__(self):
        return Operator(-self.data, self.dims)

    def __matmul__(self, other):
        if isinstance(other, Operator):
            if other.dims != self.dims:
                raise DimensionError(f"dims mismatch: {self.dims} vs {other.dims}")
            return Operator(self.data @ other.data, self.dims)
        return NotImplemented

    def __repr__(self):
        return f"Operator(dims={self.dims}, dim={self.dim})"


class DensityMatrix(Operator):
    """Hermitian, unit-trace, positive-semidefinite operator (a phonon state).

    Validation tolerances default to the module-level constants and can be
    loosened for states produced by numerical integration.  ``validate=False``
    skips the checks entirely (internal fast path).
    """

    __slots__ = ()

    def __init__(self, data, dims, *, validate=True,
                 herm_tol=HERMITICITY_TOL, trace_tol=TRACE_TOL,
                 pos_tol=POSITIVITY_TOL):
        super().__init__(data, dims)
        if validate:
            dev = np.abs(self.data - self.data.conj().T).max()
            if dev > herm_tol:
                raise HermiticityError(f"density matrix not Hermitian: deviation {dev:.3e}")
            tr = np.trace(self.data)
            if abs(tr - 1.0) > trace_tol:
                raise ValueError(f"density matrix trace {tr} deviates from 1 beyond {trace_tol}")
            emin = float(np.linalg.eigvalsh((self.data + self.data.conj().T) / 2.0).min())
            if emin < -pos_tol:
                raise ValueError(f"density matrix has negative eigenvalue {emin:.3e}")

    def purity(self) -> float:
        """Tr(rho^2); equals the squared Frobenius norm for Hermitian input."""
        return float(np.sum(np.abs(self.data) ** 2))

    def __repr__(self):
        return f"DensityMatrix(dims={self.dims}, dim={self.dim})"


class StateVector:
    """Normalized pure state on a truncated Fock space."""

    __slots__ = ("data", "dims")

    def __init__(self, data, dims, *, validate=True, norm_tol=NORM_TOL):
        dims = _as_dims(dims)
        data = np.asarray(data, dtype=complex).reshape(-1)
        if data.shape[0] != _composite_dim(dims):
            raise DimensionError(
                f"vector length {data.shape[0]} does not match composite dimension of {dims}"
            )
        if validate:
            nrm = np.linalg.norm(data)
            if abs(nrm - 1.0) > norm_tol:
                raise ValueError(f"state vector norm {nrm} deviates from 1 beyond {norm_tol}")
        data = data.copy()
        data.flags.writeable = False
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "dims", dims)

    def __setattr__(self, name, value):
        raise AttributeError("StateVector is immutable")

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    def to_density_matrix(self) -> DensityMatrix:
        return DensityMatrix(np.outer(self.data, self.data.conj()), self.dims, validate=False)

    def probability(self, index) -> float:
        """|<m1,...|psi>|^2 for a basis label (int for one mode, tuple for two)."""
        return float(np.abs(self.data[_flat_index(self.dims, index)]) ** 2)

    def __repr__(self):
        return f"StateVector(dims={self.dims}, dim={self.dim})"


def _flat_index(dims: tuple[int, ...], index) -> int:
    if isinstance(index, numbers.Integral):
        index = (int(index),)
    index = tuple(int(i) for i in index)
    if len(index) != len(dims):
        raise DimensionError(f"basis label {index} does not match {len(dims)} modes")
    flat = 0
    for i, d in zip(index, dims):
        if not 0 <= i < d:
            raise DimensionError(f"basis label {index} outside cutoffs {dims}")
        flat = flat * d + i
    return flat


def destroy(d: int) -> Operator:
    """Single-mode annihilation operator: entry (m-1, m) = sqrt(m)."""
    d = int(d)
    if d < 2:
        raise DimensionError(f"annihilation operator needs cutoff >= 2, got {d}")
    a = np.zeros((d, d), dtype=complex)
    m = np.arange(1, d)
    a[m - 1, m] = np.sqrt(m)
    return Operator(a, (d,))


def create(d: int) -> Operator:
    """Single-mode creation operator, the exact adjoint of :func:`destroy`."""
    return destroy(d).dag()


def number(d: int) -> Operator:
    """Phonon-number operator diag(0, 1, ..., d-1)."""
    if int(d) < 2:
        raise DimensionError(f"number operator needs cutoff >= 2, got {d}")
    return Operator(np.diag(np.arange(int(d), dtype=complex)), (int(d),))


def identity(d: int) -> Operator:
    if int(d) < 2:
        raise DimensionError(f"identity needs cutoff >= 2, got {d}")
    return Operator(np.eye(int(d), dtype=complex), (int(d),))


def position(d: int) -> Operator:
    """Quadrature-like combination a + a^dagger (drive/coupling building block)."""
    a = destroy(d)
    return a + a.dag()


def fock_state(dims, index) -> StateVector:
    """Basis state |m1, m2, ...> for the given cutoffs."""
    dims = _as_dims(dims)
    v = np.zeros(_composite_dim(dims), dtype=complex)
    v[_flat_index(dims, index)] = 1.0
    return StateVector(v, dims, validate=False)


def tensor(a: Operator, b: Operator, *, max_dim: int = MAX_TENSOR_DIM) -> Operator:
    """Kronecker product with mode-1-slowest basis ordering.

    The composite basis is |m1, m2> at flat index ``m1 * d2 + m2``, so
    ``tensor(A, B)[m1*d2+m2, m1'*d2+m2'] = A[m1, m1'] * B[m2, m2']``.

    Raises
    ------
    ResourceLimitError
        If the composite dimension exceeds ``max_dim``.
    """
    out_dim = a.dim * b.dim
    if out_dim > max_dim:
        raise ResourceLimitError(
            f"composite dimension {out_dim} exceeds max_dim={max_dim}; "
            "raise max_dim explicitly if this size is intended"
        )
    return Operator(np.kron(a.data, b.data), a.dims + b.dims)


def _require_two_mode(op) -> tuple[int, int]:
    if len(op.dims) != 2:
        raise DimensionError(f"expected a two-mode object, got dims {op.dims}")
    return op.dims


def partial_trace(rho: DensityMatrix, keep: int) -> DensityMatrix:
    """Trace out one mode of a two-mode state.

    Parameters
    ----------
    rho : DensityMatrix
        Two-mode state.
    keep : int
        Mode to keep, 1 or 2.
    """
    d1, d2 = _require_two_mode(rho)
    if keep not in (1, 2):
        raise DimensionError(f"keep must be 1 or 2, got {keep}")
    r = rho.data.reshape(d1, d2, d1, d2)
    if keep == 1:
        out = np.trace(r, axis1=1, axis2=3)
        dims = (d1,)
    else:
        out = np.trace(r, axis1=0, axis2=2)
        dims = (d2,)
    return DensityMatrix(out, dims, validate=False)


def partial_transpose(rho, mode: int = 2) -> Operator:
    """Transpose one mode of a two-mode operator.

    The result is Hermitian for Hermitian input but generally not positive;
    it is returned as a plain :class:`Operator`.  Applying the map twice
    returns the original matrix.
    """
    d1, d2 = _require_two_mode(rho)
    if mode not in (1, 2):
        raise DimensionError(f"mode must be 1 or 2, got {mode}")
    r = rho.data.reshape(d1, d2, d1, d2)
    if mode == 2:
        r = r.transpose(0, 3, 2, 1)
    else:
        r = r.transpose(2, 1, 0, 3)
    return Operator(r.reshape(d1 * d2, d1 * d2), (d1, d2))


def trace_norm(a: Operator, *, herm_tol: float = 1e-10) -> float:
    """Sum of singular values; for Hermitian input, the sum of |eigenvalues|.

    Hermitian matrices are detected and handled through the (exact, faster)
    eigenvalue route; anything else falls back to singular values.
    """
    m = a.data if isinstance(a, Operator) else np.asarray(a, dtype=complex)
    if np.abs(m - m.conj().T).max() <= herm_tol:
        return float(np.abs(np.linalg.eigvalsh((m + m.conj().T) / 2.0)).sum())
    return float(np.linalg.svd(m, compute_uv=False).sum())


def hermitian_eig(h: Operator, *, herm_tol: float = 1e-10):
    """Eigendecomposition of a Hermitian operator.

    Returns
    -------
    (eigenvalues, eigenvectors)
        Eigenvalues ascending (real ndarray) and a unitary matrix whose
        columns are the eigenvectors, so ``h = V diag(E) V^dagger``.

    Raises
    ------
    HermiticityError
        If the input deviates from Hermiticity beyond ``herm_tol``.
    """
    m = h.data if isinstance(h, Operator) else np.asarray(h, dtype=complex)
    dev = np.abs(m - m.conj().T).max()
    if dev > herm_tol:
        raise HermiticityError(f"matrix is not Hermitian: max deviation {dev:.3e}")
    evals, evecs = np.linalg.eigh(m)
    return evals, evecs
