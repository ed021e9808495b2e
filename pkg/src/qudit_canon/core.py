"""Grid conventions, state vectors, operator matrices and eigensolvers.

Every vector and matrix in the package lives on the symmetric grid
``n = -s, ..., s`` of an odd dimension ``d = 2s + 1``.  Storage uses the
offset ``n + s``; the offset never leaks through the public API.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterator, Mapping, Sequence

import numpy as np

ATOL_NOISE = 1e-12
RTOL_TABLE = 1e-4

# relative tolerance used to decide that two moduli are tied
_TIE_RTOL = 1e-9

STRUCTURES = ("general", "hermitian", "anti-hermitian", "unitary")


class DimensionError(ValueError):
    """Raised for an even, too small or non-integer dimension."""


class GridMismatchError(ValueError):
    """Raised when two objects defined on different grids are combined."""


class StructureError(ValueError):
    """Raised when a matrix does not have the structure it is tagged with."""


class NormalizationError(ValueError):
    """Raised when a unit vector is required and the input is not one."""


class ConvergenceError(RuntimeError):
    """Raised when a dense eigensolver fails to converge."""

    def __init__(self, message: str, iterations: int | None = None):
        super().__init__(message)
        self.iterations = iterations


@dataclass(frozen=True)
class GridSpec:
    d: int

    def __post_init__(self):
        d = self.d
        if isinstance(d, bool) or not isinstance(d, (int, np.integer)):
            raise DimensionError(f"dimension must be an integer, got {d!r}")
        if d < 3 or d % 2 == 0:
            raise DimensionError(f"dimension must be odd and >= 3, got {d}")
        object.__setattr__(self, "d", int(d))

    @property
    def s(self) -> int:
        return (self.d - 1) // 2

    def indices(self) -> np.ndarray:
        """Logical indices ``-s, ..., s`` in storage order."""
        return np.arange(-self.s, self.s + 1)

    def storage(self, n: int) -> int:
        if not -self.s <= n <= self.s:
            raise IndexError(f"logical index {n} outside [-{self.s}, {self.s}]")
        return n + self.s

    def logical(self, i: int) -> int:
        if not 0 <= i < self.d:
            raise IndexError(f"storage index {i} outside [0, {self.d})")
        return i - self.s

    def wrap(self, n):
        """Reduce integer(s) modulo ``d`` into the symmetric range."""
        return (np.asarray(n) + self.s) % self.d - self.s


def make_grid(d: int) -> GridSpec:
    return GridSpec(d)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class StateVector:
    """Complex amplitudes ``psi(n)`` on the grid, stored in storage order."""

    grid: GridSpec
    amp: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        amp = _frozen(self.amp)
        if amp.shape != (self.grid.d,):
            raise GridMismatchError(
                f"amplitude length {amp.shape} does not match d={self.grid.d}"
            )
        object.__setattr__(self, "amp", amp)
        if self.normalized:
            nrm = float(np.linalg.norm(amp))
            if abs(nrm - 1.0) > ATOL_NOISE:
                raise NormalizationError(f"vector tagged normalized has norm {nrm!r}")

    def __getitem__(self, n: int) -> complex:
        return complex(self.amp[self.grid.storage(n)])

    def __len__(self) -> int:
        return self.grid.d

    def as_array(self) -> np.ndarray:
        return np.array(self.amp)

    def unit(self) -> "StateVector":
        nrm = norm(self)
        if nrm == 0.0:
            raise NormalizationError("cannot normalize the zero vector")
        return StateVector(self.grid, self.amp / nrm, normalized=True)


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """Dense ``d x d`` matrix in the delta basis.

    Row and column ``i`` correspond to the logical index ``i - s``.  The
    structure tag is verified on construction against ``ATOL_NOISE`` scaled
    by ``max(1, max|M_ij|)``.
    """

    grid: GridSpec
    entries: np.ndarray
    structure: str = "general"
    meta: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self):
        m = _frozen(self.entries)
        d = self.grid.d
        if m.shape != (d, d):
            raise GridMismatchError(f"matrix shape {m.shape} does not match d={d}")
        if self.structure not in STRUCTURES:
            raise ValueError(f"unknown structure tag {self.structure!r}")
        object.__setattr__(self, "entries", m)
        object.__setattr__(self, "meta", MappingProxyType(dict(self.meta)))
        _verify_structure(m, self.structure)

    def element(self, n: int, m: int) -> complex:
        g = self.grid
        return complex(self.entries[g.storage(n), g.storage(m)])

    def max_norm(self) -> float:
        return float(np.abs(self.entries).max())

    def as_array(self) -> np.ndarray:
        return np.array(self.entries)

    def __matmul__(self, other):
        if isinstance(other, OperatorMatrix):
            return compose(self, other)
        if isinstance(other, StateVector):
            return apply(self, other)
        return NotImplemented


def _structure_defect(m: np.ndarray, structure: str) -> float:
    if structure == "hermitian":
        return float(np.abs(m - m.conj().T).max())
    if structure == "anti-hermitian":
        return float(np.abs(m + m.conj().T).max())
    if structure == "unitary":
        return float(np.abs(m.conj().T @ m - np.eye(m.shape[0])).max())
    return 0.0


def _verify_structure(m: np.ndarray, structure: str) -> None:
    scale = max(1.0, float(np.abs(m).max())) if structure != "unitary" else 1.0
    defect = _structure_defect(m, structure)
    if defect > ATOL_NOISE * scale:
        raise StructureError(f"matrix is not {structure}: defect {defect:.3e}")


def _same_grid(*objs) -> GridSpec:
    grid = objs[0].grid
    for o in objs[1:]:
        if o.grid != grid:
            raise GridMismatchError(f"grid d={o.grid.d} does not match d={grid.d}")
    return grid


def delta(grid: GridSpec, m: int) -> StateVector:
    """The position eigenvector ``delta_m``."""
    amp = np.zeros(grid.d, dtype=complex)
    amp[grid.storage(m)] = 1.0
    return StateVector(grid, amp, normalized=True)


def state(grid: GridSpec, values: Sequence[complex] | np.ndarray, normalize: bool = False) -> StateVector:
    """Build a state from amplitudes listed in order ``n = -s..s``."""
    v = StateVector(grid, np.asarray(values, dtype=complex))
    return v.unit() if normalize else v


def identity(grid: GridSpec) -> OperatorMatrix:
    return OperatorMatrix(grid, np.eye(grid.d), "unitary")


def inner(phi: StateVector, psi: StateVector) -> complex:
    """``<phi|psi>``, conjugate-linear in ``phi``."""
    _same_grid(phi, psi)
    return complex(np.vdot(phi.amp, psi.amp))


def norm(psi: StateVector) -> float:
    ip = inner(psi, psi)
    if abs(ip.imag) >= 1e-14:
        raise ArithmeticError(f"<psi|psi> has imaginary part {ip.imag!r}")
    return float(np.sqrt(max(ip.real, 0.0)))


def apply(op: OperatorMatrix, psi: StateVector) -> StateVector:
    _same_grid(op, psi)
    return StateVector(op.grid, op.entries @ psi.amp)


def compose(a: OperatorMatrix, b: OperatorMatrix) -> OperatorMatrix:
    grid = _same_grid(a, b)
    return OperatorMatrix(grid, a.entries @ b.entries)


def adjoint(a: OperatorMatrix) -> OperatorMatrix:
    tag = a.structure
    return OperatorMatrix(a.grid, a.entries.conj().T, tag)


def commutator(a: OperatorMatrix, b: OperatorMatrix) -> OperatorMatrix:
    grid = _same_grid(a, b)
    return OperatorMatrix(grid, a.entries @ b.entries - b.entries @ a.entries)


def fix_phase(v: np.ndarray) -> np.ndarray:
    """Rotate ``v`` so that its largest entry is real and non-negative.

    Entries whose moduli agree with the maximum to a relative ``1e-9`` count
    as tied; the lowest storage index wins.  Selection depends only on
    moduli, so the map is idempotent.
    """
    v = np.asarray(v, dtype=complex)
    mod = np.abs(v)
    top = mod.max()
    if top == 0.0:
        return v.copy()
    i = int(np.flatnonzero(mod >= top * (1.0 - _TIE_RTOL))[0])
    if v[i].imag == 0.0 and v[i].real > 0.0:
        return v.copy()
    out = v * (abs(v[i]) / v[i])
    out[i] = abs(v[i])
    return out


class SpectralDecomposition:
    """Ordered eigenpairs; iterating yields ``(eigenvalue, StateVector)``."""

    def __init__(self, grid: GridSpec, eigenvalues, eigenvectors: np.ndarray, ordering: str):
        if ordering not in ("modulus-ascending", "value-ascending"):
            raise ValueError(f"unknown ordering {ordering!r}")
        self.grid = grid
        self.ordering = ordering
        vals = np.array(eigenvalues, copy=True)
        vals.setflags(write=False)
        self.eigenvalues = vals
        vecs = np.array(eigenvectors, dtype=complex, copy=True)
        vecs.setflags(write=False)
        self._vectors = vecs  # columns

    def __len__(self) -> int:
        return len(self.eigenvalues)

    def __iter__(self) -> Iterator[tuple[complex, StateVector]]:
        for k in range(len(self)):
            yield self.eigenvalues[k], self.vector(k)

    def vector(self, k: int) -> StateVector:
        return StateVector(self.grid, self._vectors[:, k], normalized=True)

    @property
    def eigenvectors(self) -> list[StateVector]:
        return [self.vector(k) for k in range(len(self))]

    def matrix(self) -> np.ndarray:
        """Eigenvectors as the columns of a ``d x d`` array."""
        return np.array(self._vectors)


def _normalize_columns(v: np.ndarray) -> np.ndarray:
    v = v / np.linalg.norm(v, axis=0)
    return np.column_stack([fix_phase(v[:, k]) for k in range(v.shape[1])])


def _check_residuals(m: np.ndarray, vals: np.ndarray, vecs: np.ndarray) -> None:
    bound = 1e-10 * max(float(np.abs(m).max()), 1.0) * m.shape[0]
    res = np.linalg.norm(m @ vecs - vecs * vals, axis=0)
    worst = float(res.max())
    if worst > bound:
        raise ConvergenceError(f"eigenpair residual {worst:.3e} exceeds {bound:.3e}")


def eig_hermitian(op: OperatorMatrix) -> SpectralDecomposition:
    """Eigenpairs of a Hermitian matrix, eigenvalues ascending."""
    m = op.entries
    if op.structure != "hermitian":
        _verify_structure(m, "hermitian")
    m = (m + m.conj().T) / 2
    if not np.abs(m.imag).any():
        m = m.real
    try:
        vals, vecs = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"Hermitian eigensolver failed: {exc}") from exc
    vecs = _normalize_columns(vecs)
    _check_residuals(m, vals, vecs)
    return SpectralDecomposition(op.grid, vals, vecs, "value-ascending")


def _modulus_order(vals: np.ndarray) -> np.ndarray:
    """Indices sorting by modulus; near-equal moduli are ordered by phase."""
    mod = np.abs(vals)
    order = list(np.argsort(mod, kind="stable"))
    out: list[int] = []
    i = 0
    while i < len(order):
        j = i + 1
        ref = mod[order[i]]
        while j < len(order) and mod[order[j]] - ref <= _TIE_RTOL * max(ref, 1.0):
            j += 1
        group = order[i:j]
        group.sort(key=lambda k: (np.angle(vals[k]) % (2 * np.pi), k))
        out.extend(group)
        i = j
    return np.array(out, dtype=int)


def eig_general(op: OperatorMatrix) -> SpectralDecomposition:
    """Eigenpairs of an arbitrary square matrix, ordered by modulus.

    Equal moduli are ordered by the phase angle taken in ``[0, 2*pi)``.
    """
    m = op.entries
    try:
        vals, vecs = np.linalg.eig(m)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"general eigensolver failed: {exc}") from exc
    order = _modulus_order(vals)
    vals, vecs = vals[order], vecs[:, order]
    vecs = _normalize_columns(vecs)
    _check_residuals(m, vals, vecs)
    return SpectralDecomposition(op.grid, vals, vecs, "modulus-ascending")
