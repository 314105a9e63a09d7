"""Reference solver: interaction-picture Schroedinger equation for atom + mode.

The coupling enters through the rotated current j(t) = e^{i w t} e^{i H t} J
e^{-i H t}; the interaction Hamiltonian is j(t) (x) a+ + h.c. Integration is
fixed-step classical RK4 with the Hamiltonian evaluated at the stage times.
"""

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from semicav.fockspace import CompositeSpace, CompositeState, annihilation, tensor


@dataclass
class AtomFieldModel:
    """Atomic Hamiltonian, current operator and mode frequency (hbar = 1)."""

    atom_dim: int
    h_ato: np.ndarray
    j: np.ndarray
    omega: float

    def __post_init__(self):
        self.h_ato = np.asarray(self.h_ato, dtype=complex)
        self.j = np.asarray(self.j, dtype=complex)
        d = self.atom_dim
        if self.h_ato.shape != (d, d) or self.j.shape != (d, d):
            raise ValueError(f"h_ato and j must be {d}x{d} matrices")
        if np.max(np.abs(self.h_ato - self.h_ato.conj().T)) > 1e-12:
            raise ValueError("h_ato is not Hermitian within 1e-12")
        if self.omega < 0:
            raise ValueError(f"omega must be >= 0, got {self.omega}")
        evals, evecs = np.linalg.eigh(self.h_ato)
        self._evals = evals
        self._evecs = evecs


def two_level_model(g: float, detuning: float = 0.0, omega: float = 1.0) -> AtomFieldModel:
    """Canonical two-level instance: H = (w_A/2) sigma_z, J = g sigma_-.

    Basis order is (excited, ground); ``detuning`` is the atomic frequency
    minus the mode frequency, w_A = omega + detuning.
    """
    omega_a = omega + detuning
    sz = np.diag([1.0, -1.0]).astype(complex)
    sminus = np.array([[0.0, 0.0], [1.0, 0.0]], dtype=complex)
    return AtomFieldModel(atom_dim=2, h_ato=0.5 * omega_a * sz, j=g * sminus, omega=omega)


@dataclass(frozen=True)
class TimeGrid:
    """Uniform integration grid; states are sampled every ``sample_stride`` steps."""

    t_start: float
    t_end: float
    dt: float
    sample_stride: int = 1

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.t_end <= self.t_start:
            raise ValueError("t_end must exceed t_start")
        if self.sample_stride < 1:
            raise ValueError("sample_stride must be >= 1")
        steps = (self.t_end - self.t_start) / self.dt
        if abs(steps - round(steps)) > 1e-9 * max(1.0, abs(steps)):
            raise ValueError("(t_end - t_start) / dt must be an integer")

    @property
    def n_steps(self) -> int:
        return int(round((self.t_end - self.t_start) / self.dt))

    def sample_times(self) -> np.ndarray:
        idx = np.arange(0, self.n_steps + 1, self.sample_stride)
        return self.t_start + idx * self.dt


@dataclass
class Trajectory:
    """Sampled output of a unitary run."""

    times: np.ndarray
    states: list[CompositeState]


def rotated_current(model: AtomFieldModel, t: float) -> np.ndarray:
    """j(t) = e^{i omega t} e^{i H t} J e^{-i H t} via the eigendecomposition of H."""
    phase = np.exp(1j * model._evals * t)
    V = model._evecs
    rot = V @ (phase[:, None] * (V.conj().T @ model.j @ V) * np.conj(phase)[None, :]) @ V.conj().T
    return np.exp(1j * model.omega * t) * rot


def interaction_hamiltonian(model: AtomFieldModel, t: float, space: CompositeSpace) -> np.ndarray:
    """Composite-space coupling j(t) (x) a+  +  j+(t) (x) a."""
    if space.atom_dim != model.atom_dim:
        raise ValueError(
            f"space atom_dim {space.atom_dim} does not match model atom_dim {model.atom_dim}"
        )
    a = annihilation(space.fock)
    jt = rotated_current(model, t)
    half = tensor(jt, a.conj().T)
    return half + half.conj().T


def product_initial_state(
    psi_ato: np.ndarray, field_amplitudes: np.ndarray, space: CompositeSpace
) -> CompositeState:
    """Product state psi_ato (x) field, both factors required unit norm."""
    psi_ato = np.asarray(psi_ato, dtype=complex)
    field_amplitudes = np.asarray(field_amplitudes, dtype=complex)
    if abs(np.linalg.norm(psi_ato) - 1.0) > 1e-12:
        raise ValueError("atomic factor is not normalized")
    if abs(np.linalg.norm(field_amplitudes) - 1.0) > 1e-12:
        raise ValueError("field factor is not normalized")
    amps = np.kron(psi_ato, field_amplitudes)
    return CompositeState(space, amps)


def density_operator(state: CompositeState) -> np.ndarray:
    """Outer product of a pure state with itself."""
    return np.outer(state.amplitudes, state.amplitudes.conj())


def rk4_step(f: Callable[[float, np.ndarray], np.ndarray], t: float, y: np.ndarray,
             dt: float) -> np.ndarray:
    """One classical Runge-Kutta step for dy/dt = f(t, y)."""
    k1 = f(t, y)
    k2 = f(t + 0.5 * dt, y + 0.5 * dt * k1)
    k3 = f(t + 0.5 * dt, y + 0.5 * dt * k2)
    k4 = f(t + dt, y + dt * k3)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def spectral_norm_estimate(H: np.ndarray, iters: int = 20, seed: int = 0) -> float:
    """Power-iteration estimate of the spectral norm of a Hermitian matrix."""
    rng = np.random.default_rng(seed)
    v = rng.normal(size=H.shape[0]) + 1j * rng.normal(size=H.shape[0])
    v /= np.linalg.norm(v)
    est = 0.0
    for _ in range(iters):
        w = H @ v
        est = np.linalg.norm(w)
        if est == 0.0:
            return 0.0
        v = w / est
    return float(est)


def evolve_unitary(model: AtomFieldModel, psi0: CompositeState, grid: TimeGrid) -> Trajectory:
    """Integrate dPsi/dt = -i H_I(t) Psi and sample along the way.

    Raises if dt is too coarse for the coupling strength (estimated at
    ``t_start``) or if the norm drifts by more than 1e-6 during the run,
    which signals either an unstable step or truncation overflow.
    """
    space = psi0.space
    h0 = interaction_hamiltonian(model, grid.t_start, space)
    if grid.dt * spectral_norm_estimate(h0) > 0.05:
        raise ValueError("dt * ||H_I|| exceeds 0.05; reduce dt")

    def rhs(t, y):
        return -1j * (interaction_hamiltonian(model, t, space) @ y)

    y = psi0.amplitudes.copy()
    t = grid.t_start
    times = [t]
    states = [CompositeState(space, y.copy(), norm_tol=1e-6)]
    for step in range(1, grid.n_steps + 1):
        y = rk4_step(rhs, t, y, grid.dt)
        t = grid.t_start + step * grid.dt
        nrm = np.linalg.norm(y)
        if abs(nrm - 1.0) > 1e-6:
            raise RuntimeError(f"norm drifted to {nrm} at t={t}; dt too large or basis too small")
        if step % grid.sample_stride == 0:
            times.append(t)
            states.append(CompositeState(space, y.copy(), norm_tol=1e-6))
    return Trajectory(times=np.asarray(times), states=states)
