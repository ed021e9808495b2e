"""Operators on the odd-dimensional grid.

Fourier, position and momentum matrices, the commutator defect, ladder and
displacement operators, three discrete oscillator Hamiltonians and the
coherent-state quantization map.  Closed forms are used wherever the matrix
is a function of ``n - m`` only; the defining products are kept in the test
suite as independent oracles.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import GridSpec, OperatorMatrix


def _sine_kernel(d: int) -> np.ndarray:
    """``S(j) = sum_{k=1}^{s} k sin(2 pi k j / d)`` for ``j = -(d-1)..(d-1)``.

    The product ``k*j`` is reduced mod ``d`` before the trigonometric call
    so every argument lies in ``[0, 2 pi)``.
    """
    s = (d - 1) // 2
    j = np.arange(-2 * s, 2 * s + 1)
    k = np.arange(1, s + 1)
    phase = 2 * np.pi * (np.outer(j, k) % d) / d
    return (k[None, :] * np.sin(phase)).sum(axis=1)


def _toeplitz(grid: GridSpec, kernel: np.ndarray) -> np.ndarray:
    n = grid.indices()
    return kernel[(n[:, None] - n[None, :]) + 2 * grid.s]


def dft_matrix(grid: GridSpec) -> OperatorMatrix:
    d = grid.d
    n = grid.indices()
    e = np.outer(n, n) % d
    return OperatorMatrix(grid, np.exp(-2j * np.pi * e / d) / np.sqrt(d), "unitary")


def position_matrix(grid: GridSpec) -> OperatorMatrix:
    return OperatorMatrix(grid, np.diag(grid.indices()).astype(complex), "hermitian")


def momentum_matrix(grid: GridSpec) -> OperatorMatrix:
    """Momentum, the Fourier conjugate of position.

    Entry ``(n, m)`` equals ``(2i/d) * S(n - m)``; it is purely imaginary and
    odd in ``n - m``, so the diagonal vanishes.
    """
    d = grid.d
    ker = (2.0 / d) * _sine_kernel(d)
    return OperatorMatrix(grid, 1j * _toeplitz(grid, ker), "hermitian")


def defect_kernel(d: int) -> np.ndarray:
    """Real kernel ``h(j)`` with ``C = i*h(n - m)``, ``h(0) = -d/2pi``."""
    j = np.arange(-(d - 1), d)
    ker = (2.0 * j / d) * _sine_kernel(d)
    ker[d - 1] = -d / (2 * np.pi)
    return ker


def commutator_defect_hermitian(grid: GridSpec) -> np.ndarray:
    """The real symmetric matrix ``-i*C`` as a plain array."""
    return _toeplitz(grid, defect_kernel(grid.d))


def commutator_defect_matrix(grid: GridSpec) -> OperatorMatrix:
    """``[q, p] - i d/(2 pi)``, anti-Hermitian."""
    return OperatorMatrix(grid, 1j * commutator_defect_hermitian(grid), "anti-hermitian")


def commutator_defect_mp(grid: GridSpec, dps: int = 40):
    """``-i*C`` as an mpmath matrix evaluated with ``dps`` decimal digits."""
    import mpmath as mp

    d, s = grid.d, grid.s
    with mp.workdps(dps):
        ker = {}
        for j in range(-2 * s, 2 * s + 1):
            acc = mp.fsum(k * mp.sinpi(mp.mpf(2 * ((k * j) % d)) / d) for k in range(1, s + 1))
            ker[j] = mp.mpf(2 * j) / d * acc
        diag = -mp.mpf(d) / (2 * mp.pi)
        h = mp.matrix(d, d)
        for a in range(d):
            for b in range(d):
                h[a, b] = diag if a == b else ker[a - b]
    return h


def annihilation_matrix(grid: GridSpec) -> OperatorMatrix:
    c = np.sqrt(np.pi / grid.d)
    q = position_matrix(grid).entries
    p = momentum_matrix(grid).entries
    return OperatorMatrix(grid, c * (q + 1j * p))


def creation_matrix(grid: GridSpec) -> OperatorMatrix:
    c = np.sqrt(np.pi / grid.d)
    q = position_matrix(grid).entries
    p = momentum_matrix(grid).entries
    return OperatorMatrix(grid, c * (q - 1j * p))


@dataclass(frozen=True)
class PhasePoint:
    """Discrete phase-space label ``(n, k)``."""

    n: int
    k: int

    def check(self, grid: GridSpec) -> "PhasePoint":
        s = grid.s
        if not (-s <= self.n <= s and -s <= self.k <= s):
            raise IndexError(f"phase point ({self.n}, {self.k}) outside [-{s}, {s}]^2")
        return self


class PhaseFunction:
    """A complex function on the ``d x d`` discrete phase space.

    ``values[n + s, k + s]`` holds ``f(n, k)``.
    """

    def __init__(self, grid: GridSpec, values):
        vals = np.array(values, dtype=complex)
        if vals.shape != (grid.d, grid.d):
            raise ValueError(f"phase function needs shape {(grid.d, grid.d)}, got {vals.shape}")
        vals.setflags(write=False)
        self.grid = grid
        self.values = vals

    @classmethod
    def from_callable(cls, grid: GridSpec, f: Callable[[int, int], complex]) -> "PhaseFunction":
        idx = grid.indices()
        return cls(grid, [[f(int(n), int(k)) for k in idx] for n in idx])

    def __call__(self, n: int, k: int) -> complex:
        g = self.grid
        return complex(self.values[g.storage(n), g.storage(k)])

    def is_real(self) -> bool:
        return not np.any(self.values.imag)


def displacement_matrix(grid: GridSpec, p: PhasePoint) -> OperatorMatrix:
    """Weyl displacement ``D(n, k)`` with the shift wrapped modulo ``d``."""
    p.check(grid)
    d = grid.d
    m = grid.indices()
    out = np.zeros((d, d), dtype=complex)
    src = (m - p.n + grid.s) % d
    phase = np.exp(-1j * np.pi * p.n * p.k / d) * np.exp(2j * np.pi * ((p.k * m) % d) / d)
    out[np.arange(d), src] = phase
    return OperatorMatrix(grid, out, "unitary")


def oscillator_hamiltonian(grid: GridSpec) -> OperatorMatrix:
    """``(p^2 + q^2) / 2``; ``p^2`` is built from its cosine kernel."""
    d, s = grid.d, grid.s
    j = np.arange(-2 * s, 2 * s + 1)
    k = np.arange(1, s + 1)
    ker = (2.0 / d) * ((k**2)[None, :] * np.cos(2 * np.pi * (np.outer(j, k) % d) / d)).sum(axis=1)
    h = 0.5 * (_toeplitz(grid, ker) + np.diag(grid.indices() ** 2.0))
    return OperatorMatrix(grid, h, "hermitian")


def harper_hamiltonian(grid: GridSpec) -> OperatorMatrix:
    """Finite-difference oscillator: ``4 - 2cos(2 pi n/d)`` on the diagonal,
    ``-1`` on the cyclic neighbours."""
    d = grid.d
    n = grid.indices()
    h = np.diag(4.0 - 2.0 * np.cos(2 * np.pi * n / d))
    i = np.arange(d)
    h[i, (i + 1) % d] -= 1.0
    h[i, (i - 1) % d] -= 1.0
    return OperatorMatrix(grid, h, "hermitian")


def cs_quantize(grid: GridSpec, f: PhaseFunction, meta: dict | None = None) -> OperatorMatrix:
    """Coherent-state quantization ``sum_{n,k} f(n,k) |n,k><n,k|``.

    Uses the ``1/sqrt(d)``-weighted coherent states, whose projectors
    resolve the identity.  Terms are accumulated in row-major ``(n, k)``
    order through one matrix product, so the result is reproducible.
    """
    from .states import coherent_state

    if f.grid != grid:
        raise ValueError("phase function and grid differ")
    if not np.all(np.isfinite(f.values)):
        raise ValueError("phase function has non-finite values")
    idx = grid.indices()
    vecs = np.array([
        coherent_state(grid, PhasePoint(int(n), int(k)), weighted=True).amp
        for n in idx for k in idx
    ])
    weights = f.values.reshape(-1)
    a = (vecs.T * weights) @ vecs.conj()
    if f.is_real():
        a = (a + a.conj().T) / 2
        return OperatorMatrix(grid, a, "hermitian", meta or {})
    return OperatorMatrix(grid, a, "general", meta or {})


def quantized_oscillator(grid: GridSpec) -> OperatorMatrix:
    """Quantized ``(n^2 + k^2)/2``.

    The constant ``-1/2`` that usually accompanies this operator is left
    out; it is recorded as ``meta['constant_shift']``.
    """
    f = PhaseFunction.from_callable(grid, lambda n, k: (n * n + k * k) / 2.0)
    return cs_quantize(grid, f, meta={"constant_shift": -0.5})
