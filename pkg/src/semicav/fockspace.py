"""Truncated Fock-space and composite-space operator algebra.

Everything here is dense numpy linear algebra at desk scale (dimensions of
a few hundred at most). Operator identities involving the ladder operators
are exact only away from the truncation edge; callers that rely on them
must keep operator supports a few occupation levels below ``n_max``.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm


@dataclass(frozen=True)
class FockBasis:
    """Single radiation mode truncated at occupation number ``n_max``."""

    n_max: int

    def __post_init__(self):
        if self.n_max < 2:
            raise ValueError(f"n_max must be >= 2, got {self.n_max}")

    @property
    def dim(self) -> int:
        return self.n_max + 1


@dataclass(frozen=True)
class CompositeSpace:
    """Atom tensor mode space; composite index = atom_index * fock_dim + fock_index."""

    atom_dim: int
    fock: FockBasis

    def __post_init__(self):
        if self.atom_dim < 1:
            raise ValueError(f"atom_dim must be >= 1, got {self.atom_dim}")

    @property
    def total_dim(self) -> int:
        return self.atom_dim * self.fock.dim

    def field_operator(self, op: np.ndarray) -> np.ndarray:
        """Lift a field-space operator to the composite space."""
        return np.kron(np.eye(self.atom_dim, dtype=complex), op)

    def atom_operator(self, op: np.ndarray) -> np.ndarray:
        """Lift an atomic operator to the composite space."""
        return np.kron(np.asarray(op, dtype=complex), np.eye(self.fock.dim))


@dataclass
class CompositeState:
    """Normalized pure state of the atom+mode system.

    ``norm_tol`` loosens the unit-norm check for states produced by long
    integrations, where round-off drift above 1e-12 is legitimate.
    """

    space: CompositeSpace
    amplitudes: np.ndarray
    norm_tol: float = field(default=1e-12, repr=False)

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (self.space.total_dim,):
            raise ValueError(
                f"amplitude vector has shape {self.amplitudes.shape}, "
                f"expected ({self.space.total_dim},)"
            )
        nrm = np.linalg.norm(self.amplitudes)
        if abs(nrm - 1.0) > self.norm_tol:
            raise ValueError(f"state norm {nrm} deviates from 1 by more than {self.norm_tol}")

    def as_matrix(self) -> np.ndarray:
        """Amplitudes reshaped to (atom_dim, fock_dim)."""
        return self.amplitudes.reshape(self.space.atom_dim, self.space.fock.dim)


def annihilation(basis: FockBasis) -> np.ndarray:
    """Absorption operator: entry sqrt(n) at (n-1, n)."""
    return np.diag(np.sqrt(np.arange(1, basis.dim)), 1).astype(complex)


def creation(basis: FockBasis) -> np.ndarray:
    return annihilation(basis).conj().T


def number_operator(basis: FockBasis) -> np.ndarray:
    a = annihilation(basis)
    return a.conj().T @ a


def coherent_amplitudes(alpha: complex, basis: FockBasis) -> np.ndarray:
    """Truncated coherent-state expansion alpha^n / sqrt(n!), renormalized."""
    n = np.arange(basis.dim)
    log_fact = np.cumsum(np.concatenate(([0.0], np.log(np.arange(1, basis.dim)))))
    amps = np.power(complex(alpha), n) * np.exp(-0.5 * log_fact)
    return amps / np.linalg.norm(amps)


def tensor(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Kronecker product, atom factor first."""
    return np.kron(np.asarray(A, dtype=complex), np.asarray(B, dtype=complex))


def symmetric_product(A: np.ndarray, O: np.ndarray) -> np.ndarray:
    """Symmetric (Jordan) product (A O + O A) / 2."""
    A = np.asarray(A)
    O = np.asarray(O)
    if A.shape != O.shape or A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"need square matrices of equal size, got {A.shape} and {O.shape}")
    return 0.5 * (A @ O + O @ A)


def superop_weyl_apply(lam: complex, rho: np.ndarray, basis: FockBasis) -> np.ndarray:
    """Apply the symmetric-order displacement superoperator to an operator.

    Computes ``exp(-lam* a/2) exp(lam a+/2) rho exp(lam a+/2) exp(-lam* a/2)``
    with the matrix exponentials taken on the truncated field space. ``rho``
    may live on the field space itself or on a composite space whose field
    factor matches ``basis``; in the latter case the exponential factors act
    on the field factor only.

    The caller is responsible for keeping ``|lam|`` small enough (and the
    support of ``rho`` low enough) that truncation spill-over at the top
    Fock levels is negligible.
    """
    rho = np.asarray(rho, dtype=complex)
    dim = basis.dim
    if rho.shape[0] % dim != 0:
        raise ValueError(f"operator dimension {rho.shape[0]} is not a multiple of {dim}")
    a = annihilation(basis)
    e_lower = expm(-0.5 * np.conj(lam) * a)
    e_raise = expm(0.5 * lam * a.conj().T)
    if rho.shape[0] != dim:
        blocks = rho.shape[0] // dim
        eye = np.eye(blocks, dtype=complex)
        e_lower = np.kron(eye, e_lower)
        e_raise = np.kron(eye, e_raise)
    return e_lower @ e_raise @ rho @ e_raise @ e_lower


def partial_trace_field(O: np.ndarray, space: CompositeSpace) -> np.ndarray:
    """Trace out the mode: entry (i, j) = sum_n O[(i,n), (j,n)]."""
    O = np.asarray(O)
    tot = space.total_dim
    if O.shape != (tot, tot):
        raise ValueError(f"operator has shape {O.shape}, expected ({tot}, {tot})")
    d, nf = space.atom_dim, space.fock.dim
    return np.einsum("injn->ij", O.reshape(d, nf, d, nf))


def partial_trace_atom(O: np.ndarray, space: CompositeSpace) -> np.ndarray:
    """Trace out the atom, leaving a field-space operator."""
    O = np.asarray(O)
    tot = space.total_dim
    if O.shape != (tot, tot):
        raise ValueError(f"operator has shape {O.shape}, expected ({tot}, {tot})")
    d, nf = space.atom_dim, space.fock.dim
    return np.einsum("inim->nm", O.reshape(d, nf, d, nf))
