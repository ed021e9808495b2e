"""State families on the grid.

Periodized Gaussians, the commutator-defect eigenbasis, coherent states,
ladder-power states, eigenstates of the discrete oscillators and of the
annihilation operator, periodized Hermite-Gauss states and Kravchuk states.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .core import (
    ATOL_NOISE,
    ConvergenceError,
    GridSpec,
    NormalizationError,
    SpectralDecomposition,
    StateVector,
    eig_general,
    eig_hermitian,
    fix_phase,
)
from .operators import (
    PhasePoint,
    annihilation_matrix,
    commutator_defect_hermitian,
    commutator_defect_mp,
    creation_matrix,
    dft_matrix,
    displacement_matrix,
    harper_hamiltonian,
    oscillator_hamiltonian,
    quantized_oscillator,
)


class TruncationError(ValueError):
    """Raised when a truncated lattice sum cannot reach its tail tolerance."""


FAMILIES = (
    "gaussian", "commutator-eigen", "coherent", "creation-power", "oscillator",
    "quantized", "harper", "annihilation", "mehta", "kravchuk",
)


@dataclass(frozen=True)
class ThetaParams:
    """Width ``kappa`` and truncation ``|alpha| <= trunc_radius`` of the lattice sum."""

    kappa: float
    trunc_radius: int = 10
    tail_tol: float = 1e-17

    def __post_init__(self):
        if not (self.kappa > 0 and math.isfinite(self.kappa)):
            raise ValueError(f"kappa must be positive and finite, got {self.kappa!r}")
        if int(self.trunc_radius) != self.trunc_radius or self.trunc_radius < 1:
            raise ValueError(f"trunc_radius must be an integer >= 1, got {self.trunc_radius!r}")
        if not self.tail_tol > 0:
            raise ValueError("tail_tol must be positive")

    def log_first_omitted(self, d: int) -> float:
        """Log of the largest term left out of the sum, over all grid points."""
        s = (d - 1) // 2
        x = self.trunc_radius * d + s + 1
        return -self.kappa * math.pi * x * x / d

    def certify(self, d: int) -> None:
        if self.log_first_omitted(d) >= math.log(self.tail_tol):
            raise TruncationError(
                f"kappa={self.kappa}, A={self.trunc_radius}: omitted tail exceeds {self.tail_tol}"
            )


@dataclass(frozen=True)
class StateFamily:
    label: str
    index: object
    state: StateVector

    def __post_init__(self):
        if self.label not in FAMILIES:
            raise ValueError(f"unknown family {self.label!r}")
        if abs(float(np.linalg.norm(self.state.amp)) - 1.0) > ATOL_NOISE:
            raise NormalizationError(f"{self.label}[{self.index}] is not unit norm")


def _as_theta(theta) -> ThetaParams:
    return theta if isinstance(theta, ThetaParams) else ThetaParams(float(theta))


def discrete_gaussian(grid: GridSpec, theta) -> StateVector:
    """Normalized periodized Gaussian with width ``theta.kappa``.

    Values for ``n >= 0`` are summed once and mirrored, so the result is
    exactly even.  ``theta`` may also be a bare ``kappa``.
    """
    theta = _as_theta(theta)
    d, s = grid.d, grid.s
    theta.certify(d)
    a = np.arange(-theta.trunc_radius, theta.trunc_radius + 1)
    n = np.arange(0, s + 1)
    x = n[:, None] + a[None, :] * d
    half = np.exp(-theta.kappa * np.pi * x * x / d).sum(axis=1)
    g = np.concatenate([half[:0:-1], half])
    return StateVector(grid, g / np.linalg.norm(g), normalized=True)


def fourier_of_gaussian_check(grid: GridSpec, kappa: float) -> float:
    """``||F g_kappa - g_{1/kappa}||``."""
    f = dft_matrix(grid).entries
    g = discrete_gaussian(grid, kappa).amp
    h = discrete_gaussian(grid, 1.0 / kappa).amp
    return float(np.linalg.norm(f @ g - h))


def fourier_class_bases(grid: GridSpec) -> list[np.ndarray]:
    """Orthonormal real bases of the four eigenspaces of the DFT.

    Class ``c`` collects the eigenvalue ``(-i)**c``.  The projector onto
    each class is a real symmetric matrix, so its eigenvectors are real.
    """
    f = dft_matrix(grid).entries
    powers = [np.eye(grid.d), f, f @ f, f @ f @ f]
    bases = []
    for c in range(4):
        mu = (-1j) ** c
        proj = sum(np.conj(mu) ** j * powers[j] for j in range(4)) / 4
        w, v = np.linalg.eigh(proj.real)
        bases.append(v[:, w > 0.5])
    return bases


class CommutatorBasis(SpectralDecomposition):
    """Eigenpairs of the commutator defect with their DFT classes."""

    def __init__(self, grid, eigenvalues, eigenvectors, classes):
        super().__init__(grid, eigenvalues, eigenvectors, "modulus-ascending")
        self.classes = tuple(int(c) for c in classes)


def _class_projector_mp(d: int, c: int):
    """Projector onto DFT class ``c`` in mpmath, from cos/sin tables."""
    import mpmath as mp

    s = (d - 1) // 2
    root = mp.sqrt(d)
    sgn_r = 1 if c in (0, 2) else -1
    sgn_f = {0: 2, 2: -2, 1: 2, 3: -2}[c]
    trig = mp.cospi if c in (0, 2) else mp.sinpi
    p = mp.matrix(d, d)
    for a in range(d):
        for b in range(d):
            x = sgn_f * trig(mp.mpf(2 * (((a - s) * (b - s)) % d)) / d) / root
            if a == b:
                x += 1
            if a + b == 2 * s:
                x += sgn_r
            p[a, b] = x / 4
    return p


def _refine_block(h_mp, basis: np.ndarray, c: int, dps: int):
    """Rayleigh-Ritz step in extended precision on one DFT class block.

    The double-precision basis is first pushed through the exact class
    projector so that the block does not leak into the other classes.
    """
    import mpmath as mp

    with mp.workdps(dps):
        b = _class_projector_mp(basis.shape[0], c) * mp.matrix(basis.tolist())
        gram = b.T * b
        hb = b.T * (h_mp * b)
        lo_inv = mp.inverse(mp.cholesky(gram))
        a = lo_inv * hb * lo_inv.T
        w, z = mp.eigsy((a + a.T) / 2)
        y = b * (lo_inv.T * z)
        vals = [float(w[i]) for i in range(len(w))]
        vecs = np.array(y.tolist(), dtype=float)
    return vals, vecs


@lru_cache(maxsize=16)
def commutator_eigenbasis(grid: GridSpec, precision: int | None = None) -> CommutatorBasis:
    """Eigenpairs of ``C = [q, p] - i d/2pi``, ordered by increasing ``|lambda|``.

    ``C`` commutes with the DFT, so ``-iC`` is diagonalized separately on
    each DFT eigenspace; every returned vector is then an exact DFT
    eigenvector and the eigenvalues are ``i`` times real numbers.  With
    ``precision`` set, each block is re-solved with that many decimal
    digits, which resolves eigenvalues far below double rounding of the
    largest ones.
    """
    h = commutator_defect_hermitian(grid)
    h_mp = commutator_defect_mp(grid, precision) if precision else None
    vals, vecs, classes = [], [], []
    for c, basis in enumerate(fourier_class_bases(grid)):
        if basis.shape[1] == 0:
            continue
        if h_mp is not None:
            w, v = _refine_block(h_mp, basis, c, precision)
        else:
            w, y = np.linalg.eigh(basis.T @ h @ basis)
            v = basis @ y
        vals.extend(w)
        vecs.append(v)
        classes.extend([c] * len(w))
    vals = np.array(vals)
    vecs = np.hstack(vecs)
    order = np.lexsort((vals, np.abs(vals)))
    vecs = vecs[:, order] / np.linalg.norm(vecs[:, order], axis=0)
    vecs = np.column_stack([fix_phase(vecs[:, k]) for k in range(grid.d)])
    res = np.linalg.norm(h @ vecs - vecs * vals[order], axis=0).max()
    bound = 1e-10 * np.abs(h).max() * grid.d
    if res > bound:
        raise ConvergenceError(f"commutator eigenpair residual {res:.3e} exceeds {bound:.3e}")
    return CommutatorBasis(grid, 1j * vals[order], vecs, [classes[i] for i in order])


def coherent_state(grid: GridSpec, p: PhasePoint, weighted: bool = False) -> StateVector:
    """Displaced vacuum ``D(n,k) g_1``.

    ``weighted=True`` keeps the ``1/sqrt(d)`` factor used in quantization
    sums; otherwise the state is normalized to one.
    """
    vac = _vacuum(grid)
    amp = displacement_matrix(grid, p).entries @ vac
    if weighted:
        return StateVector(grid, amp / np.sqrt(grid.d))
    return StateVector(grid, amp / np.linalg.norm(amp), normalized=True)


@lru_cache(maxsize=16)
def _vacuum(grid: GridSpec) -> np.ndarray:
    return discrete_gaussian(grid, 1.0).as_array()


def creation_power_state(grid: GridSpec, n: int, cap: int | None = None) -> StateVector:
    """``(a^dagger)^n g_1``, normalized."""
    cap = 2 * grid.s if cap is None else cap
    if not 0 <= n <= cap:
        raise ValueError(f"power {n} outside [0, {cap}]")
    ad = creation_matrix(grid).entries
    v = _vacuum(grid).astype(complex)
    for _ in range(n):
        v = ad @ v
    nrm = np.linalg.norm(v)
    if not nrm > 1e-200:
        raise NormalizationError(f"creation power {n} collapsed to zero")
    return StateVector(grid, v / nrm, normalized=True)


def oscillator_eigenstates(grid: GridSpec) -> list[StateVector]:
    return eig_hermitian(oscillator_hamiltonian(grid)).eigenvectors


def quantized_eigenstates(grid: GridSpec) -> list[StateVector]:
    return eig_hermitian(quantized_oscillator(grid)).eigenvectors


def harper_eigenstates(grid: GridSpec) -> list[StateVector]:
    return eig_hermitian(harper_hamiltonian(grid)).eigenvectors


def annihilation_eigenstates(grid: GridSpec) -> list[StateVector]:
    """Eigenvectors of ``a`` by increasing eigenvalue modulus."""
    return eig_general(annihilation_matrix(grid)).eigenvectors


MEHTA_CONVENTIONS = ("dft", "appendix", "unit-gaussian")


def _mehta_scaling(d: int, convention: str) -> tuple[float, float]:
    """(Hermite argument scale, Gaussian exponent coefficient)."""
    if convention == "dft":
        return math.sqrt(2 * math.pi / d), math.pi / d
    if convention == "appendix":
        return 1.0, math.pi / d
    if convention == "unit-gaussian":
        return 1.0, 0.5
    raise ValueError(f"unknown convention {convention!r}; choose from {MEHTA_CONVENTIONS}")


def mehta_state(grid: GridSpec, n: int, convention: str = "dft", trunc_radius: int = 10,
                tail_tol: float = 1e-17) -> StateVector:
    """Periodized Hermite-Gauss function ``sum_a H_n(c x) exp(-b x^2)``, ``x = m + a d``.

    ``convention`` picks ``(c, b)``:

    * ``"dft"``: ``c = sqrt(2 pi/d)``, ``b = pi/d``.  These are exact DFT
      eigenvectors with eigenvalue ``(-i)**n``.
    * ``"appendix"``: ``c = 1``, ``b = pi/d``.  Unscaled Hermite argument
      with the ``g_1`` Gaussian.
    * ``"unit-gaussian"``: ``c = 1``, ``b = 1/2``.

    The Hermite values come from the three-term recurrence carried out on
    ``H_j(c x) exp(-b x^2)`` directly, so nothing overflows.
    """
    if n < 0:
        raise ValueError("Hermite degree must be non-negative")
    d, s = grid.d, grid.s
    c, b = _mehta_scaling(d, convention)
    xmax = trunc_radius * d + s + 1
    y = c * xmax
    log_tail = n * math.log(2 * y + 2 * n + 1) - b * xmax * xmax
    if log_tail >= math.log(tail_tol):
        raise TruncationError(f"Hermite degree {n}: lattice tail exceeds {tail_tol}")
    a = np.arange(-trunc_radius, trunc_radius + 1)
    m = np.arange(0, s + 1)
    x = (m[:, None] + a[None, :] * d).astype(float)
    y = c * x
    prev = np.zeros_like(x)
    cur = np.exp(-b * x * x)
    for j in range(n):
        prev, cur = cur, 2 * y * cur - 2 * j * prev
    half = cur.sum(axis=1)
    sign = -1.0 if n % 2 else 1.0
    v = np.concatenate([sign * half[:0:-1], half])
    nrm = np.linalg.norm(v)
    if not nrm > 0:
        raise NormalizationError(f"Hermite-Gauss state {n} vanished")
    return StateVector(grid, v / nrm, normalized=True)


def _poly_pow(sign: int, e: int) -> list[int]:
    return [math.comb(e, j) * sign**j for j in range(e + 1)]


def _convolve(a: list[int], b: list[int]) -> list[int]:
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


@lru_cache(maxsize=4096)
def _kravchuk_row(s: int, k: int) -> tuple[int, ...]:
    return tuple(_convolve(_poly_pow(-1, s + k), _poly_pow(1, s - k)))


def kravchuk_polynomial(s: int, m: int, k: int) -> int:
    """Coefficient of ``X**(s+m)`` in ``(1-X)**(s+k) * (1+X)**(s-k)``, exactly."""
    if not (-s <= m <= s and -s <= k <= s):
        raise ValueError(f"m={m}, k={k} outside [-{s}, {s}]")
    return _kravchuk_row(s, k)[s + m]


def kravchuk_state(grid: GridSpec, m: int) -> StateVector:
    """Kravchuk function ``2**-s sqrt(C(2s, s+n) / C(2s, s+m)) K_m(n)``.

    Everything except the final square root is exact rational arithmetic.
    """
    s = grid.s
    if not -s <= m <= s:
        raise ValueError(f"m={m} outside [-{s}, {s}]")
    cm = math.comb(2 * s, s + m)
    amp = []
    for n in range(-s, s + 1):
        k = kravchuk_polynomial(s, m, n)
        ratio = Fraction(math.comb(2 * s, s + n) * k * k, cm * 4**s)
        amp.append(math.copysign(math.sqrt(ratio), k) if k else 0.0)
    return StateVector(grid, np.array(amp), normalized=True)


def build_family(grid: GridSpec, label: str, index, **kw) -> StateFamily:
    """Construct one member of a named family.

    ``index`` is ``kappa`` for gaussians, ``(n, k)`` for coherent states and
    an integer otherwise.
    """
    if label == "gaussian":
        st = discrete_gaussian(grid, index)
    elif label == "commutator-eigen":
        st = commutator_eigenbasis(grid, kw.get("precision")).vector(index)
    elif label == "coherent":
        st = coherent_state(grid, PhasePoint(*index))
    elif label == "creation-power":
        st = creation_power_state(grid, index)
    elif label == "oscillator":
        st = oscillator_eigenstates(grid)[index]
    elif label == "quantized":
        st = quantized_eigenstates(grid)[index]
    elif label == "harper":
        st = harper_eigenstates(grid)[index]
    elif label == "annihilation":
        st = annihilation_eigenstates(grid)[index]
    elif label == "mehta":
        st = mehta_state(grid, index, kw.get("convention", "dft"))
    elif label == "kravchuk":
        st = kravchuk_state(grid, index)
    else:
        raise ValueError(f"unknown family {label!r}")
    return StateFamily(label, index, st)
