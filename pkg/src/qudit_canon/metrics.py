"""Canonicity metrics for states on the grid."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Mapping

import numpy as np

from .core import GridSpec, GridMismatchError, NormalizationError, StateVector, make_grid
from .operators import commutator_defect_hermitian, commutator_defect_mp, dft_matrix, momentum_matrix
from .states import commutator_eigenbasis, discrete_gaussian

_UNIT_TOL = 1e-8


@lru_cache(maxsize=16)
def _defect_h(grid: GridSpec) -> np.ndarray:
    h = commutator_defect_hermitian(grid)
    h.setflags(write=False)
    return h


def _unit(grid: GridSpec, psi: StateVector) -> np.ndarray:
    if psi.grid != grid:
        raise GridMismatchError(f"state on d={psi.grid.d} used with d={grid.d}")
    nrm = float(np.linalg.norm(psi.amp))
    if abs(nrm - 1.0) > _UNIT_TOL:
        raise NormalizationError(f"state has norm {nrm!r}, expected 1")
    return psi.amp


def residual_norm(grid: GridSpec, psi: StateVector) -> float:
    """``||C psi||`` with ``C = [q, p] - i d/2pi``."""
    v = _unit(grid, psi)
    return float(np.linalg.norm(_defect_h(grid) @ v))


def commutator_expectation(grid: GridSpec, psi: StateVector) -> complex:
    """``<psi|[q, p]|psi>``."""
    v = _unit(grid, psi)
    c = complex(np.vdot(v, 1j * (_defect_h(grid) @ v)))
    return c + 1j * grid.d / (2 * np.pi)


def expectation_defect(grid: GridSpec, psi: StateVector, precision: int | None = None) -> float:
    """``| |<psi|[q, p]|psi>| - d/2pi |``.

    Evaluated as ``|x^2 + 2Dy + y^2| / (|iD + c| + D)`` with ``c = x + iy =
    <psi|C|psi>`` and ``D = d/2pi``, which is the same number without the
    cancellation of subtracting two values close to ``D``.

    In double precision the entries of ``C`` near ``D`` carry rounding of
    order ``1e-16 * D``, which limits the result to about ``1e-14``
    absolute.  With ``precision`` set, ``y = <psi|-iC|psi>`` is summed with
    that many decimal digits against an extended-precision ``C``; ``x``
    vanishes identically because ``-iC`` is real symmetric.
    """
    v = _unit(grid, psi)
    if precision:
        return _defect_extended(grid, v, precision)
    big = grid.d / (2 * np.pi)
    c = complex(np.vdot(v, 1j * (_defect_h(grid) @ v)))
    x, y = c.real, c.imag
    return float(abs(x * x + 2 * big * y + y * y) / (abs(1j * big + c) + big))


@lru_cache(maxsize=8)
def _defect_h_mp(grid: GridSpec, precision: int):
    return commutator_defect_mp(grid, precision)


def _defect_extended(grid: GridSpec, v: np.ndarray, precision: int) -> float:
    import mpmath as mp

    h = _defect_h_mp(grid, precision)
    d = grid.d
    with mp.workdps(precision):
        y = mp.mpf(0)
        for part in (v.real, v.imag):
            if not part.any():
                continue
            u = [mp.mpf(float(t)) for t in part]
            y += mp.fsum(u[a] * mp.fsum(h[a, b] * u[b] for b in range(d)) for a in range(d))
        nrm2 = mp.fsum(mp.mpf(float(t)) ** 2 for t in np.concatenate([v.real, v.imag]))
        y = y / nrm2
        big = mp.mpf(d) / (2 * mp.pi)
        return float(abs(abs(big + y) - big))


def in_S_epsilon(grid: GridSpec, psi: StateVector, eps: float) -> bool:
    if not eps > 0:
        raise ValueError("epsilon must be positive")
    return residual_norm(grid, psi) < eps


def canonical_fraction(d: int, eps: float) -> tuple[int, float]:
    """Number and share of defect eigenvalues with ``|lambda| < eps``."""
    grid = make_grid(d)
    lam = np.linalg.eigvalsh(_defect_h(grid))
    count = int(np.count_nonzero(np.abs(lam) < eps))
    return count, count / grid.d


def uncertainty_product(grid: GridSpec, psi: StateVector) -> tuple[float, float, float]:
    """``(dq, dp, dq*dp)`` for a unit state."""
    v = _unit(grid, psi)
    q = grid.indices().astype(float)
    p = momentum_matrix(grid).entries
    w = np.abs(v) ** 2
    var_q = float(w @ q**2 - (w @ q) ** 2)
    pv = p @ v
    var_p = float(np.vdot(pv, pv).real - np.vdot(v, pv).real ** 2)
    for name, var in (("position", var_q), ("momentum", var_p)):
        if var < -1e-12:
            raise ArithmeticError(f"{name} variance {var!r} is negative")
    dq, dp = np.sqrt(max(var_q, 0.0)), np.sqrt(max(var_p, 0.0))
    return float(dq), float(dp), float(dq * dp)


def fourier_eigenclass(grid: GridSpec, phi: StateVector) -> tuple[tuple[float, ...], int | None]:
    """Norms ``||F phi - mu phi||`` for ``mu = 1, -1, i, -i`` and the DFT class.

    The class is the ``c`` with ``||F phi - (-i)**c phi|| < 1e-6``.
    """
    v = _unit(grid, phi)
    fv = dft_matrix(grid).entries @ v
    norms = tuple(float(np.linalg.norm(fv - mu * v)) for mu in (1, -1, 1j, -1j))
    # (-i)**c for c = 0..3 is 1, -i, -1, i: positions 0, 3, 1, 2
    by_class = (norms[0], norms[3], norms[1], norms[2])
    hits = [c for c in range(4) if by_class[c] < 1e-6]
    return norms, (hits[0] if hits else None)


def gaussian_coordinates(grid: GridSpec, kappa: float, precision: int | None = None) -> np.ndarray:
    """``|<phi_k|g_kappa>|`` over the commutator eigenbasis."""
    basis = commutator_eigenbasis(grid, precision).matrix()
    g = discrete_gaussian(grid, kappa).amp
    return np.abs(basis.conj().T @ g)


@dataclass(frozen=True)
class CanonReport:
    residual: float
    expectation_defect: float
    delta_q: float
    delta_p: float
    uncertainty_product: float
    in_S: Mapping[float, bool] = field(default_factory=dict)


def canon_report(grid: GridSpec, psi: StateVector, eps: Iterable[float] = (1e-3,)) -> CanonReport:
    r = residual_norm(grid, psi)
    dq, dp, prod = uncertainty_product(grid, psi)
    return CanonReport(
        residual=r,
        expectation_defect=expectation_defect(grid, psi),
        delta_q=dq,
        delta_p=dp,
        uncertainty_product=prod,
        in_S={float(e): r < e for e in eps},
    )
