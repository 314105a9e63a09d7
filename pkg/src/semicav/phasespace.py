"""Quasi-probability machinery on a discretized complex plane.

Conventions, fixed once and used everywhere:

* A phase-space point is ``a = x + i y``; the integration measure written
  ``da* da`` in the quantum-optics literature is implemented as ``dx dy``.
  With that reading the vacuum Wigner function is (2/pi) exp(-2|a|^2) and
  the Q-function (1/pi) <a|rho|a> integrates to one.
* Characteristic functions live on a lambda-grid conjugate to the spatial
  grid: spacing pi/(M h), extent pi/h. The Fourier inversion
  (1/pi^2) int e^{-lam a* + lam* a} chi(lam) d^2 lam then maps exactly onto
  centered FFTs, with no residual phase factors.
* Dirac deltas of superoperator arguments are never discretized; every
  phase-space density is computed through the characteristic-function
  route, with displacement matrix elements evaluated in closed form on the
  truncated Fock space.
"""

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.fft as sfft
from scipy.linalg import expm
from scipy.special import eval_genlaguerre, gammaln

from semicav.fockspace import (
    CompositeSpace,
    FockBasis,
    annihilation,
    symmetric_product,
    superop_weyl_apply,
)

# Spacing of the reference grid (L=5, M=128) at which the consistency
# tolerance below equals 1e-4.
_REFERENCE_H = 5.0 / 64.0


@dataclass(frozen=True)
class PhaseGrid:
    """Uniform grid over Re a, Im a in [-L, L), M points per axis.

    M must be a power of two so the Fourier-side grids pair up exactly.
    Nodes sit at x_k = -L + k h with h = 2L/M; the quadrature weight is
    h^2 per node.
    """

    L: float
    M: int

    def __post_init__(self):
        if self.L <= 0:
            raise ValueError("L must be positive")
        if self.M < 32 or (self.M & (self.M - 1)) != 0:
            raise ValueError("M must be a power of two, at least 32")

    @property
    def h(self) -> float:
        return 2.0 * self.L / self.M

    @property
    def weight(self) -> float:
        return self.h ** 2

    @property
    def tol(self) -> float:
        """Grid consistency tolerance: 1e-4 at the reference spacing, scaling h^2."""
        return 1e-4 * (self.h / _REFERENCE_H) ** 2

    def axis(self) -> np.ndarray:
        return np.arange(self.M) * self.h - self.L

    def nodes(self) -> np.ndarray:
        """Complex node array, indexed [ix, iy]."""
        x = self.axis()
        return x[:, None] + 1j * x[None, :]

    def lambda_axis(self) -> np.ndarray:
        """Centered conjugate axis: spacing pi/(M h), extent pi/h."""
        delta = np.pi / (self.M * self.h)
        return (np.arange(self.M) - self.M // 2) * delta

    def lambda_nodes(self) -> np.ndarray:
        u = self.lambda_axis()
        return u[:, None] + 1j * u[None, :]

    def boundary_mask(self) -> np.ndarray:
        mask = np.zeros((self.M, self.M), dtype=bool)
        mask[0, :] = mask[-1, :] = True
        mask[:, 0] = mask[:, -1] = True
        return mask


@dataclass
class PhaseFunction:
    """Scalar field on a PhaseGrid; ``kind`` selects the validation contract."""

    grid: PhaseGrid
    values: np.ndarray
    kind: str = "generic"

    def __post_init__(self):
        if self.kind not in ("wigner", "husimi", "generic"):
            raise ValueError(f"unknown kind {self.kind!r}")
        self.values = np.asarray(self.values)
        if self.values.shape != (self.grid.M, self.grid.M):
            raise ValueError("values shape does not match grid")
        if self.kind == "husimi":
            if np.iscomplexobj(self.values):
                if np.max(np.abs(self.values.imag)) > 1e-10:
                    raise ValueError("husimi values must be real")
                self.values = self.values.real
            if self.values.min() < -1e-10:
                raise ValueError(f"husimi values dip to {self.values.min()}")
        if self.kind in ("wigner", "husimi"):
            total = self.integral()
            if abs(total - 1.0) > self.grid.tol:
                raise ValueError(f"quadrature sum {total} deviates from 1 beyond grid tolerance")

    def integral(self) -> float:
        return float(np.sum(self.values.real) * self.grid.weight)


@dataclass
class OperatorPhaseField:
    """Atomic-matrix-valued field: values[ix, iy] is a d x d matrix.

    The ``husimi`` kind must be Hermitian positive semidefinite node by
    node; ``psd_tol`` loosens that check for fields produced by quadrature
    (Gaussian smoothing of a sharp field) rather than by the closed-form
    coherent-state diagonal.
    """

    grid: PhaseGrid
    values: np.ndarray
    kind: str = "sharp"
    psd_tol: float = 1e-10
    truncation_flags: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in ("sharp", "husimi"):
            raise ValueError(f"unknown kind {self.kind!r}")
        self.values = np.asarray(self.values, dtype=complex)
        M = self.grid.M
        if self.values.ndim != 4 or self.values.shape[:2] != (M, M) \
                or self.values.shape[2] != self.values.shape[3]:
            raise ValueError("values must have shape (M, M, d, d)")
        if self.kind == "husimi":
            herm_defect = np.max(np.abs(self.values - self.values.conj().transpose(0, 1, 3, 2)))
            if herm_defect > self.psd_tol:
                raise ValueError(f"node matrices deviate from Hermitian by {herm_defect}")
            eigs = np.linalg.eigvalsh(0.5 * (self.values
                                             + self.values.conj().transpose(0, 1, 3, 2)))
            if eigs.min() < -self.psd_tol:
                raise ValueError(f"node matrices have eigenvalue {eigs.min()}")

    @property
    def atom_dim(self) -> int:
        return self.values.shape[2]

    def atomic_trace(self) -> PhaseFunction:
        tr = np.einsum("xyii->xy", self.values)
        kind = "husimi" if self.kind == "husimi" else "wigner"
        return PhaseFunction(self.grid, tr.real if kind == "husimi" else tr, kind)

    def integrate(self) -> np.ndarray:
        """Quadrature over the grid, yielding a d x d atomic matrix."""
        return np.sum(self.values, axis=(0, 1)) * self.grid.weight


@dataclass(frozen=True)
class CharacteristicSample:
    """One sample chi(lambda) of a symmetric-order characteristic function."""

    lam: complex
    value: complex


@dataclass
class GaussianKernel:
    """Vacuum-noise smoothing kernel (2/pi) exp(-2|a|^2) sampled on a grid."""

    grid: PhaseGrid
    values: np.ndarray

    @classmethod
    def vacuum(cls, grid: PhaseGrid, width_scale: float = 1.0, validate: bool = True):
        """Sample the kernel; ``width_scale`` rescales the noise amplitude.

        ``width_scale != 1`` produces a deliberately wrong kernel (used as a
        negative control in the verification pipeline) and requires
        ``validate=False``.
        """
        r2 = np.abs(grid.nodes()) ** 2
        s2 = width_scale ** 2
        values = (2.0 / (np.pi * s2)) * np.exp(-2.0 * r2 / s2)
        kernel = cls(grid, values)
        if validate:
            total = np.sum(values) * grid.weight
            if abs(total - 1.0) > grid.tol:
                raise ValueError(f"kernel integral {total} deviates from 1")
            second = np.sum(r2 * values) * grid.weight
            if abs(second - 0.5) > grid.tol:
                raise ValueError(f"kernel second moment {second} deviates from 1/2")
        return kernel


_PROBE_POINTS = np.array(
    [0.0, 0.3 + 0.1j, -0.8j, 1.2 - 0.7j, -1.5 + 0.4j, 0.05 + 1.9j, -2.0 - 0.3j, 0.9 + 0.9j]
)


@dataclass
class SemiclassicalObservable:
    """Phase-space symbol F(a, a*) with an optional polynomial form.

    ``poly`` maps exponent pairs (j, k) to coefficients of a^j (a*)^k. An
    optional atomic operator factor multiplies the scalar symbol, so that
    purely atomic observables are the special case of a constant symbol.
    When both a callable symbol and a polynomial are supplied they must
    agree; the polynomial is the form used for operator substitution.
    """

    symbol: Callable[[np.ndarray], np.ndarray] | None = None
    poly: dict[tuple[int, int], complex] | None = None
    atom_op: np.ndarray | None = None
    name: str = ""

    def __post_init__(self):
        if self.symbol is None and self.poly is None:
            raise ValueError("observable needs a symbol or a polynomial form")
        if self.atom_op is not None:
            self.atom_op = np.asarray(self.atom_op, dtype=complex)
        if self.poly is not None and self.symbol is not None:
            sampled = self.symbol(_PROBE_POINTS)
            from_poly = self._poly_eval(_PROBE_POINTS)
            scale = max(1.0, np.max(np.abs(from_poly)))
            if np.max(np.abs(sampled - from_poly)) > 1e-12 * scale:
                raise ValueError("polynomial form does not reproduce the sampled symbol")

    @classmethod
    def from_poly(cls, poly: dict[tuple[int, int], complex],
                  atom_op: np.ndarray | None = None, name: str = ""):
        return cls(symbol=None, poly=dict(poly), atom_op=atom_op, name=name)

    @classmethod
    def constant(cls, c: complex = 1.0, atom_op: np.ndarray | None = None, name: str = ""):
        return cls.from_poly({(0, 0): c}, atom_op=atom_op, name=name)

    @classmethod
    def abs_square(cls):
        return cls.from_poly({(1, 1): 1.0}, name="|a|^2")

    def _poly_eval(self, a: np.ndarray) -> np.ndarray:
        out = np.zeros_like(a, dtype=complex)
        for (j, k), c in self.poly.items():
            out += c * np.power(a, j) * np.power(np.conj(a), k)
        return out

    def evaluate(self, a: np.ndarray) -> np.ndarray:
        if self.symbol is not None:
            return np.asarray(self.symbol(a))
        return self._poly_eval(a)

    def values_on(self, grid: PhaseGrid) -> np.ndarray:
        return self.evaluate(grid.nodes())

    def degree(self) -> int | None:
        if self.poly is None:
            return None
        return max((j + k for j, k in self.poly), default=0)

    def coarse_grained(self, kernel_moment_scale: float = 1.0):
        """Average the polynomial form over vacuum noise.

        Cross-moments <a0^p a0*^q> of the kernel vanish except for p = q,
        where they equal p! / 2^p; the result is again a polynomial.
        """
        if self.poly is None:
            raise ValueError("coarse-graining requires a polynomial form")
        from math import comb, factorial

        out: dict[tuple[int, int], complex] = {}
        for (j, k), c in self.poly.items():
            for p in range(min(j, k) + 1):
                moment = factorial(p) * (kernel_moment_scale / 2.0) ** p
                key = (j - p, k - p)
                out[key] = out.get(key, 0.0) + c * comb(j, p) * comb(k, p) * moment
        return SemiclassicalObservable.from_poly(out, atom_op=self.atom_op,
                                                 name=f"smoothed({self.name})")


def characteristic_function(rho_field: np.ndarray, lam: complex) -> CharacteristicSample:
    """Symmetric-order characteristic function tr(exp(lam a+ - lam* a) rho).

    The displacement exponential is taken on the truncated space, so the
    result is reliable when the state support plus the displacement reach
    stays below the truncation edge.
    """
    rho_field = np.asarray(rho_field, dtype=complex)
    basis = FockBasis(rho_field.shape[0] - 1)
    a = annihilation(basis)
    gen = lam * a.conj().T - np.conj(lam) * a
    return CharacteristicSample(lam, complex(np.trace(expm(gen) @ rho_field)))


def superop_characteristic_function(rho: np.ndarray, lam: complex,
                                    basis: FockBasis) -> CharacteristicSample:
    """Same characteristic function through the symmetric-product route.

    Applies the four-factor product form of the superoperator displacement
    and traces; agreement with :func:`characteristic_function` is the
    operational statement that symmetric ordering and Weyl ordering
    coincide.
    """
    shifted = superop_weyl_apply(lam, rho, basis)
    return CharacteristicSample(lam, complex(np.trace(shifted)))


def _chi_on_grid(block: np.ndarray, lam: np.ndarray) -> np.ndarray:
    """tr(D(lam) block) for every lambda in an array, in closed form.

    Uses the Laguerre form of the displacement matrix elements; exact on
    the truncated space because the ladder operators are nilpotent there.
    """
    n_max = block.shape[0] - 1
    absq = np.abs(lam) ** 2
    env = np.exp(-0.5 * absq)
    chi = np.zeros(lam.shape, dtype=complex)
    for m in range(n_max + 1):
        for n in range(m + 1):
            k = m - n
            ratio = np.exp(0.5 * (gammaln(n + 1) - gammaln(m + 1)))
            common = ratio * env * eval_genlaguerre(n, k, absq)
            if k == 0:
                chi += block[n, m] * common
            else:
                chi += common * (np.power(lam, k) * block[n, m]
                                 + np.power(-np.conj(lam), k) * block[m, n])
    return chi


def _invert_characteristic(chi: np.ndarray, grid: PhaseGrid) -> np.ndarray:
    """(1/pi^2) int e^{-lam a* + lam* a} chi(lam) d^2 lam on the paired grids.

    With a = x + iy and lam = u + iv the kernel is e^{2i(uy - vx)}; on the
    centered grids this is exactly one forward and one inverse DFT.
    """
    delta = np.pi / (grid.M * grid.h)
    t = sfft.fftshift(sfft.fft(sfft.ifftshift(chi, axes=1), axis=1), axes=1)
    w = sfft.fftshift(sfft.ifft(sfft.ifftshift(t, axes=0), axis=0), axes=0) * grid.M
    return w.T * (delta ** 2 / np.pi ** 2)


def _check_grid_covers(w: np.ndarray, grid: PhaseGrid) -> None:
    """Reject transforms whose mass reaches the edge of the periodic grid.

    The discrete inversion conserves the quadrature sum exactly (it equals
    chi(0)), so a state leaking past the grid wraps around instead of
    denormalizing; significant boundary values are the reliable symptom.
    """
    edge = float(np.max(np.abs(w[grid.boundary_mask()])))
    if edge > 1e-4:
        raise ValueError(f"boundary value {edge}; grid too small for this state")


def wigner(rho_field: np.ndarray, grid: PhaseGrid) -> PhaseFunction:
    """Wigner function of a field state by Fourier inversion of chi."""
    rho_field = np.asarray(rho_field, dtype=complex)
    w = _invert_characteristic(_chi_on_grid(rho_field, grid.lambda_nodes()), grid)
    total = float(np.sum(w.real) * grid.weight)
    if not 0.99 <= total <= 1.01:
        raise ValueError(f"quadrature normalization {total}; grid too small for this state")
    _check_grid_covers(w, grid)
    return PhaseFunction(grid, w.real, kind="wigner")


def sharp_density(rho: np.ndarray, space: CompositeSpace, grid: PhaseGrid) -> OperatorPhaseField:
    """Operator-valued Wigner transform over the field factor.

    Each atomic block (i, j) of the composite density operator is an
    operator on the field space and transforms independently; the atomic
    trace of the result is the Wigner function of the field-reduced state,
    and the quadrature over the grid is the reduced atomic density
    operator.
    """
    rho = np.asarray(rho, dtype=complex)
    d, nf = space.atom_dim, space.fock.dim
    if rho.shape != (space.total_dim, space.total_dim):
        raise ValueError(f"density operator has shape {rho.shape}")
    rho4 = rho.reshape(d, nf, d, nf)
    lam = grid.lambda_nodes()
    values = np.empty((grid.M, grid.M, d, d), dtype=complex)
    for i in range(d):
        for j in range(d):
            values[:, :, i, j] = _invert_characteristic(_chi_on_grid(rho4[i, :, j, :], lam), grid)
    _check_grid_covers(np.einsum("xyii->xy", values), grid)
    return OperatorPhaseField(grid, values, kind="sharp")


def _convolve_with_kernel(values: np.ndarray, grid: PhaseGrid,
                          kernel: GaussianKernel) -> np.ndarray:
    """Circular FFT convolution with the sampled kernel, weight h^2."""
    kft = sfft.fft2(sfft.ifftshift(kernel.values))
    if values.ndim == 2:
        return sfft.ifft2(sfft.fft2(values) * kft) * grid.weight
    extra = (np.s_[:],) * 2 + (None,) * (values.ndim - 2)
    return sfft.ifft2(sfft.fft2(values, axes=(0, 1)) * kft[extra], axes=(0, 1)) * grid.weight


def _boundary_mass(values: np.ndarray, grid: PhaseGrid) -> float:
    mask = grid.boundary_mask()
    flat = np.abs(values[mask])
    if flat.ndim > 1:
        flat = flat.reshape(flat.shape[0], -1).max(axis=1)
    return float(np.sum(flat) * grid.weight)


def coarse_grain(f, grid: PhaseGrid | None = None, kernel: GaussianKernel | None = None):
    """Gaussian vacuum-noise smoothing; returns the same kind of object.

    Scalar and operator fields are convolved by Fourier multiplication with
    the sampled kernel, assuming the field is negligible at the grid
    boundary (periodic wrap-around). Polynomial observables are smoothed
    exactly through the kernel moments instead, since polynomials do not
    decay and a periodic convolution would corrupt them.
    """
    if isinstance(f, SemiclassicalObservable):
        return f.coarse_grained()
    grid = grid if grid is not None else f.grid
    if grid is not f.grid and (grid.L != f.grid.L or grid.M != f.grid.M):
        raise ValueError("input is not sampled on the requested grid")
    if kernel is None:
        kernel = GaussianKernel.vacuum(grid)
    bmass = _boundary_mass(f.values, grid)
    if bmass > 1e-8:
        raise ValueError(f"boundary mass {bmass} too large for periodic convolution")
    smoothed = _convolve_with_kernel(f.values, grid, kernel)
    if isinstance(f, PhaseFunction):
        kind = "husimi" if f.kind == "wigner" else "generic"
        vals = smoothed.real if kind == "husimi" else smoothed
        return PhaseFunction(grid, vals, kind=kind)
    if isinstance(f, OperatorPhaseField):
        kind = "husimi" if f.kind == "sharp" else f.kind
        return OperatorPhaseField(grid, smoothed, kind=kind, psd_tol=max(1e-10, grid.tol))
    raise TypeError(f"cannot coarse-grain {type(f).__name__}")


def _coherent_overlap_matrix(grid: PhaseGrid, n_max: int) -> np.ndarray:
    """C[ix, iy, n] = <n|a> = exp(-|a|^2/2) a^n / sqrt(n!)."""
    a = grid.nodes()[:, :, None]
    n = np.arange(n_max + 1)
    return np.exp(-0.5 * np.abs(a) ** 2) * np.power(a, n) * np.exp(-0.5 * gammaln(n + 1))


def husimi_density(rho: np.ndarray, space: CompositeSpace, grid: PhaseGrid) -> OperatorPhaseField:
    """Coherent-state diagonal (1/pi) <a|rho|a> over the field factor.

    The node matrices are Hermitian positive semidefinite by construction.
    Nodes beyond |a| = sqrt(n_max)/2 whose truncated coherent expansion
    misses more than 1e-10 of its weight are flagged in
    ``truncation_flags``: values there are exact for states inside the
    truncated space but do not approximate any higher-occupation physics.
    """
    rho = np.asarray(rho, dtype=complex)
    d, nf = space.atom_dim, space.fock.dim
    if rho.shape != (space.total_dim, space.total_dim):
        raise ValueError(f"density operator has shape {rho.shape}")
    rho4 = rho.reshape(d, nf, d, nf)
    C = _coherent_overlap_matrix(grid, space.fock.n_max)
    vals = np.einsum("xym,imjn,xyn->xyij", C.conj(), rho4, C) / np.pi
    vals = 0.5 * (vals + vals.conj().transpose(0, 1, 3, 2))
    deficit = 1.0 - np.sum(np.abs(C) ** 2, axis=2)
    flags = (np.abs(grid.nodes()) > 0.5 * np.sqrt(space.fock.n_max)) & (deficit > 1e-10)
    return OperatorPhaseField(grid, vals, kind="husimi", truncation_flags=flags)


def husimi_function(rho_field: np.ndarray, grid: PhaseGrid) -> PhaseFunction:
    """Scalar Q-function of a field-only state."""
    rho_field = np.asarray(rho_field, dtype=complex)
    space = CompositeSpace(1, FockBasis(rho_field.shape[0] - 1))
    return husimi_density(rho_field, space, grid).atomic_trace()


def semiclassical_expectation(F: SemiclassicalObservable, field) -> float:
    """Quadrature of F against a phase-space density.

    For an operator-valued density the atomic factor of ``F`` (identity if
    absent) is traced against the node matrices. The imaginary residue is
    dropped; meaningful for Hermitian observables.
    """
    sym = F.values_on(field.grid)
    if isinstance(field, PhaseFunction):
        if F.atom_op is not None:
            raise ValueError("scalar density cannot carry an atomic operator factor")
        total = np.sum(sym * field.values)
    elif isinstance(field, OperatorPhaseField):
        d = field.atom_dim
        atom = F.atom_op if F.atom_op is not None else np.eye(d, dtype=complex)
        traces = np.einsum("ij,xyji->xy", atom, field.values)
        total = np.sum(sym * traces)
    else:
        raise TypeError(f"cannot integrate against {type(field).__name__}")
    return float(np.real(total) * field.grid.weight)


def phase_space_moment(field, j: int, k: int) -> complex:
    """Complex moment int a^j (a*)^k f(a) dx dy of a scalar or operator field."""
    if isinstance(field, OperatorPhaseField):
        vals = np.einsum("xyii->xy", field.values)
    else:
        vals = field.values
    a = field.grid.nodes()
    return complex(np.sum(np.power(a, j) * np.power(np.conj(a), k) * vals) * field.grid.weight)


def photon_number_from_husimi(Q: PhaseFunction) -> float:
    """Mean photon number from the Q-function: int |a|^2 Q - 1.

    The subtraction removes the vacuum-noise contribution added by the
    coarse-graining, making the result exact rather than approximate.
    """
    if Q.kind != "husimi":
        raise ValueError("photon-number extraction requires a husimi-kind function")
    a = Q.grid.nodes()
    return float(np.sum(np.abs(a) ** 2 * Q.values) * Q.grid.weight - 1.0)


def symmetric_moment_oracle(poly: SemiclassicalObservable, rho: np.ndarray,
                            basis: FockBasis) -> complex:
    """Operator-side value tr(F(a_c, a_c+) rho) built monomial by monomial.

    Each monomial a^j (a*)^k is substituted by j applications of the
    symmetric product with the annihilation operator and k with the
    creation operator (order immaterial, the two superoperators commute up
    to truncation). ``rho`` may be a field operator or a composite one; in
    the composite case the ladder operators act on the field factor and an
    atomic factor of the observable multiplies before the trace.
    """
    if poly.poly is None:
        raise ValueError("operator substitution requires a polynomial form")
    deg = poly.degree()
    if deg > 4:
        raise ValueError(f"total degree {deg} exceeds the supported maximum of 4")
    rho = np.asarray(rho, dtype=complex)
    dim = basis.dim
    if rho.shape[0] % dim != 0:
        raise ValueError(f"operator dimension {rho.shape[0]} is not a multiple of {dim}")
    blocks = rho.shape[0] // dim
    a = annihilation(basis)
    if blocks > 1:
        a = np.kron(np.eye(blocks, dtype=complex), a)
    ad = a.conj().T
    atom = None
    if poly.atom_op is not None:
        if poly.atom_op.shape[0] != blocks:
            raise ValueError("atomic factor does not match the composite structure")
        atom = np.kron(poly.atom_op, np.eye(dim, dtype=complex))
    total = 0.0 + 0.0j
    for (j, k), c in poly.poly.items():
        X = rho
        for _ in range(j):
            X = symmetric_product(a, X)
        for _ in range(k):
            X = symmetric_product(ad, X)
        if atom is not None:
            X = atom @ X
        total += c * np.trace(X)
    return complex(total)
