"""Hamiltonian functions of density matrices and their switched composites.

A :class:`HamiltonianFunction` is a real energy ``H(rho)`` together with its
Hermitian gradient ``G(rho)`` (the effective Hamiltonian: ``dH = Tr(G drho)``,
and the induced pure-state flow is ``i dpsi/dt = G(|psi><psi|) psi``). Energy
functionals that cannot be written as functions of ``rho`` alone (not phase
invariant) are rejected by :func:`check_acceptable`.

The built-in catalogue covers the linear form ``<H>``, the quadratic average
``c <X>^2 / 2`` for Hermitian ``X``, and the mean-field form
``c ||<sigma>||^2 / 2`` whose gradient is the Bloch-vector field
``c <sigma>.sigma``. Custom functions may supply only ``energy``; the gradient
then falls back to central finite differences over the Hermitian entries of
``rho`` (flagged in trajectory metadata).

:func:`polchinski_extend` builds the multiparticle composite: each subsystem
contributes its own energy evaluated on its reduced density matrix, gated by a
reversed-step switching factor that shuts the term off at that subsystem's
detection time. Reduced dynamics of one subsystem is then independent of every
other subsystem's Hamiltonian function and detection time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import qstate

COMMUTATOR_TOL = 1e-12


def theta(x: float) -> int:
    """Reversed step: 1 for x < 0, else 0.

    theta(t - t_k) keeps a subsystem's generator on strictly before its
    detection time t_k; at x = 0 the particle already counts as detected.
    """
    if not math.isfinite(x):
        if math.isnan(x):
            raise ValueError("theta argument must not be NaN")
        return 1 if x < 0 else 0
    return 1 if x < 0 else 0


def kappa(t: float, t_k: float) -> float:
    """Integral of theta(tau - t_k) over [0, t]: min(t, t_k).

    Non-decreasing in t and constant once t passes the detection time; with
    t_k = +inf it reduces to t (the never-detected sentinel).
    """
    if t < 0:
        raise ValueError("kappa requires t >= 0")
    return min(t, t_k)


# ---------------------------------------------------------------------------
# Hamiltonian functions


@dataclass(frozen=True)
class GeneratorTerm:
    """One structured generator term c <O>^p O.

    ``power`` 0 gives a linear energy ``c <O>``, ``power`` 1 the quadratic
    average ``c <O>^2 / 2``; in general the energy contribution is
    ``c <O>^(p+1) / (p+1)``.
    """

    operator: np.ndarray
    power: int
    coef: float

    def __post_init__(self):
        op = qstate.check_hermitian(self.operator, name="generator term operator")
        op = op.copy()
        op.setflags(write=False)
        object.__setattr__(self, "operator", op)
        if self.power < 0:
            raise ValueError("generator term power must be >= 0")


class HamiltonianFunction:
    """Real energy function of a density matrix with its effective Hamiltonian."""

    def __init__(
        self,
        label: str,
        energy: Callable[[np.ndarray], float] | None = None,
        gradient: Callable[[np.ndarray], np.ndarray] | None = None,
        state_energy: Callable[[np.ndarray], float] | None = None,
        terms: Sequence[GeneratorTerm] | None = None,
        conserved_generator: bool | None = None,
        fd_step: float = 1e-5,
    ):
        if energy is None and terms is None and state_energy is None:
            raise ValueError("need at least one of energy, terms, state_energy")
        self.label = label
        self._energy = energy
        self._gradient = gradient
        self._state_energy = state_energy
        self.terms = tuple(terms) if terms is not None else None
        self.fd_step = float(fd_step)
        if conserved_generator is None:
            conserved_generator = self._terms_commute() if self.terms else False
        self.conserved_generator = bool(conserved_generator)

    def _terms_commute(self) -> bool:
        ops = [t.operator for t in self.terms]
        for i in range(len(ops)):
            for j in range(i + 1, len(ops)):
                comm = ops[i] @ ops[j] - ops[j] @ ops[i]
                if np.max(np.abs(comm)) > COMMUTATOR_TOL:
                    return False
        return True

    @property
    def dim(self) -> int | None:
        if self.terms:
            return self.terms[0].operator.shape[0]
        return None

    @property
    def has_analytic_gradient(self) -> bool:
        return self.terms is not None or self._gradient is not None

    @property
    def uses_fd_gradient(self) -> bool:
        return not self.has_analytic_gradient

    def energy(self, rho) -> float:
        rho = np.asarray(rho, dtype=complex)
        if self.terms is not None:
            total = 0.0
            for term in self.terms:
                ev = np.trace(rho @ term.operator).real
                total += term.coef * ev ** (term.power + 1) / (term.power + 1)
            return float(total)
        if self._energy is not None:
            return float(self._energy(rho))
        raise TypeError(f"{self.label!r} is defined on state vectors only; no density-matrix form")

    def state_energy(self, psi) -> float:
        psi = np.asarray(psi, dtype=complex)
        if self._state_energy is not None:
            return float(self._state_energy(psi))
        return self.energy(np.outer(psi, psi.conj()))

    def effective_matrix(self, rho) -> np.ndarray:
        """Hermitian gradient G(rho); analytic when available, else central FD."""
        rho = np.asarray(rho, dtype=complex)
        if self.terms is not None:
            g = np.zeros_like(rho)
            for term in self.terms:
                ev = np.trace(rho @ term.operator).real
                g = g + term.coef * ev ** term.power * term.operator
            return g
        if self._gradient is not None:
            return qstate.check_hermitian(self._gradient(rho), tol=1e-10, name="supplied gradient")
        return _fd_gradient(self.energy, rho, self.fd_step)

    def __repr__(self):
        return f"HamiltonianFunction({self.label!r})"


def _fd_gradient(energy: Callable[[np.ndarray], float], rho: np.ndarray, step: float) -> np.ndarray:
    """Central finite-difference gradient over the Hermitian entries of rho."""
    d = rho.shape[0]
    g = np.zeros((d, d), dtype=complex)
    for i in range(d):
        e = np.zeros((d, d), dtype=complex)
        e[i, i] = 1.0
        g[i, i] = (energy(rho + step * e) - energy(rho - step * e)) / (2 * step)
    for i in range(d):
        for j in range(i + 1, d):
            ex = np.zeros((d, d), dtype=complex)
            ex[i, j] = 1.0
            ex[j, i] = 1.0
            dx = (energy(rho + step * ex) - energy(rho - step * ex)) / (2 * step)
            ey = np.zeros((d, d), dtype=complex)
            ey[i, j] = 1j
            ey[j, i] = -1j
            dy = (energy(rho + step * ey) - energy(rho - step * ey)) / (2 * step)
            g[i, j] = (dx + 1j * dy) / 2
            g[j, i] = (dx - 1j * dy) / 2
    if not np.all(np.isfinite(g)):
        raise ValueError("finite-difference gradient produced non-finite entries")
    return g


# ---------------------------------------------------------------------------
# catalogue factories


def linear(op, label: str | None = None) -> HamiltonianFunction:
    """Energy <H> = Tr(rho H), the bilinear (linear quantum mechanics) case."""
    op = qstate.check_hermitian(op, name="linear Hamiltonian operator")
    return HamiltonianFunction(
        label or "linear", terms=(GeneratorTerm(op, power=0, coef=1.0),)
    )


def quadratic_average(op, coef: float = 1.0, label: str | None = None) -> HamiltonianFunction:
    """Energy coef * <X>^2 / 2 with gradient coef * <X> X."""
    op = qstate.check_hermitian(op, name="quadratic-average operator")
    return HamiltonianFunction(
        label or "quadratic-average", terms=(GeneratorTerm(op, power=1, coef=float(coef)),)
    )


def mean_field(coupling: float = 1.0, label: str | None = None) -> HamiltonianFunction:
    """Qubit mean-field energy coupling * ||<sigma>||^2 / 2.

    The gradient is coupling * <sigma>.sigma, i.e. precession in the field
    produced by the beam's own average magnetic moment. The Bloch vector is
    conserved along this flow (it precesses about itself), so the generator
    is constant despite the non-commuting terms. The overall proportionality
    between the field and Tr(rho sigma) is the ``coupling`` parameter.
    """
    terms = tuple(
        GeneratorTerm(op, power=1, coef=float(coupling))
        for op in (qstate.sigma_x, qstate.sigma_y, qstate.sigma_z)
    )
    return HamiltonianFunction(label or "mean-field", terms=terms, conserved_generator=True)


def from_callable(
    energy: Callable[[np.ndarray], float],
    gradient: Callable[[np.ndarray], np.ndarray] | None = None,
    label: str = "custom",
    conserved_generator: bool = False,
    fd_step: float = 1e-5,
) -> HamiltonianFunction:
    """Wrap a user energy function of rho; gradient falls back to finite differences.

    ``energy`` must be defined on Hermitian matrices in a neighbourhood of the
    density-matrix manifold (finite differencing perturbs trace and spectrum).
    """
    return HamiltonianFunction(
        label, energy=energy, gradient=gradient,
        conserved_generator=conserved_generator, fd_step=fd_step,
    )


def from_state_function(func: Callable[[np.ndarray], float], label: str = "state-functional") -> HamiltonianFunction:
    """Wrap a wavefunction-level energy functional, e.g. to probe acceptability.

    No density-matrix form is attached, so such functions cannot enter
    multiparticle extensions or gradient flows.
    """
    return HamiltonianFunction(label, state_energy=func)


CATALOGUE_NAMES = ("linear-z", "quadratic-z", "mean-field")


def catalogue_entry(name: str, coef: float = 1.0) -> HamiltonianFunction:
    """Named catalogue entries addressable from CLI configs."""
    if name == "linear-z":
        return linear(coef * np.asarray(qstate.sigma_z), label=f"linear-z[{coef:g}]")
    if name == "quadratic-z":
        return quadratic_average(qstate.sigma_z, coef, label=f"quadratic-z[{coef:g}]")
    if name == "mean-field":
        return mean_field(coef, label=f"mean-field[{coef:g}]")
    raise ValueError(f"unknown catalogue entry {name!r}; known: {CATALOGUE_NAMES}")


# ---------------------------------------------------------------------------
# acceptability and gradients at pure states


def check_acceptable(h: HamiltonianFunction, trials: int, dim: int,
                     rng: np.random.Generator | None = None, tol: float = 1e-9) -> bool:
    """Probabilistic global-phase-invariance test of an energy functional.

    Draws ``trials`` random (state, phase) pairs and checks
    |H(e^{i a} psi) - H(psi)| <= tol for each. A True verdict can in
    principle be a false accept (finitely many samples); any single violation
    is conclusive.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = rng if rng is not None else np.random.default_rng(20260810)
    for _ in range(trials):
        v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
        v = v / np.linalg.norm(v)
        alpha = rng.uniform(0.0, 2 * np.pi)
        if abs(h.state_energy(np.exp(1j * alpha) * v) - h.state_energy(v)) > tol:
            return False
    return True


def effective_hamiltonian(h: HamiltonianFunction, psi) -> np.ndarray:
    """Hermitian M with i dpsi/dt = M psi at the pure state psi."""
    psi = qstate.check_state(psi)
    return h.effective_matrix(np.outer(psi, psi.conj()))


# ---------------------------------------------------------------------------
# switching schedules and the multiparticle extension


@dataclass(frozen=True)
class SwitchingSchedule:
    """Per-subsystem detection times; +inf means never detected."""

    detection_times: tuple[float, ...]
    subsystem_dims: tuple[int, ...]

    def __post_init__(self):
        times = tuple(float(t) for t in self.detection_times)
        dims = tuple(int(d) for d in self.subsystem_dims)
        if len(times) != len(dims) or not times:
            raise ValueError("need one detection time per subsystem")
        for t in times:
            if math.isnan(t) or t < 0:
                raise ValueError(f"detection times must be >= 0 or +inf, got {t}")
        for d in dims:
            if d < 1:
                raise ValueError("subsystem dimensions must be positive")
        object.__setattr__(self, "detection_times", times)
        object.__setattr__(self, "subsystem_dims", dims)

    @classmethod
    def never(cls, dims) -> "SwitchingSchedule":
        dims = tuple(int(d) for d in dims)
        return cls((math.inf,) * len(dims), dims)

    @property
    def composite_dim(self) -> int:
        return int(np.prod(self.subsystem_dims))


class SwitchedHamiltonian:
    """Time-parametrized composite sum_k theta(t - t_k) H_k(rho_k).

    Produced by :func:`polchinski_extend`. Each part acts on its own reduced
    density matrix, so switching one subsystem off never feeds back on the
    others' reduced dynamics.
    """

    def __init__(self, parts: Sequence[HamiltonianFunction], dims: Sequence[int],
                 detection_times: Sequence[float]):
        self.parts = tuple(parts)
        self.dims = tuple(int(d) for d in dims)
        self.detection_times = tuple(float(t) for t in detection_times)
        if not (len(self.parts) == len(self.dims) == len(self.detection_times)):
            raise ValueError("parts, dims and detection times must align")
        for part, d in zip(self.parts, self.dims):
            if part.dim is not None and part.dim != d:
                raise ValueError(
                    f"part {part.label!r} has dimension {part.dim}, subsystem expects {d}"
                )
        self._structured = None
        self._structured_known = False

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims))

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(p.label for p in self.parts)

    def active(self, t: float) -> tuple[bool, ...]:
        return tuple(bool(theta(t - tk)) for tk in self.detection_times)

    def energy(self, t: float, rho) -> float:
        rho = np.asarray(rho, dtype=complex)
        total = 0.0
        for k, (part, tk) in enumerate(zip(self.parts, self.detection_times)):
            if theta(t - tk):
                total += part.energy(qstate.reduced_density(rho, self.dims, k))
        return float(total)

    def effective_matrix(self, t: float, psi) -> np.ndarray:
        """Composite Hermitian generator at time t for the pure state psi."""
        psi = np.asarray(psi, dtype=complex)
        rho = np.outer(psi, psi.conj())
        m = np.zeros((self.dim, self.dim), dtype=complex)
        for k, (part, tk) in enumerate(zip(self.parts, self.detection_times)):
            if theta(t - tk):
                g = part.effective_matrix(qstate.reduced_density(rho, self.dims, k))
                m += qstate.lift_operator(g, self.dims, k)
        return m

    def structured(self):
        """Stacked (ops, coefs, powers, switch_times) for the fast kernels.

        Available only when every part carries explicit generator terms;
        returns None otherwise (the generic integrator path then applies).
        """
        if not self._structured_known:
            if any(p.terms is None for p in self.parts):
                self._structured = None
            else:
                ops, coefs, powers, tsw = [], [], [], []
                for k, (part, tk) in enumerate(zip(self.parts, self.detection_times)):
                    for term in part.terms:
                        ops.append(qstate.lift_operator(term.operator, self.dims, k))
                        coefs.append(term.coef)
                        powers.append(term.power)
                        tsw.append(tk)
                self._structured = (
                    np.ascontiguousarray(np.stack(ops)),
                    np.asarray(coefs, dtype=float),
                    np.asarray(powers, dtype=np.int64),
                    np.asarray(tsw, dtype=float),
                )
            self._structured_known = True
        return self._structured

    @property
    def uses_fd_gradient(self) -> tuple[bool, ...]:
        return tuple(p.uses_fd_gradient for p in self.parts)


def polchinski_extend(h_list: Sequence[HamiltonianFunction], dims: Sequence[int],
                      schedule: SwitchingSchedule) -> SwitchedHamiltonian:
    """Compose one Hamiltonian function per subsystem into the switched extension.

    At time t the composite energy is sum_k theta(t - t_k) H_k(rho_k) with
    rho_k the k-th reduced density matrix; with an all-infinite schedule this
    is the plain unswitched multiparticle extension.
    """
    dims = tuple(int(d) for d in dims)
    if len(h_list) != len(dims):
        raise ValueError("need exactly one Hamiltonian function per subsystem")
    if schedule.subsystem_dims != dims:
        raise ValueError(
            f"schedule dims {schedule.subsystem_dims} do not match subsystem dims {dims}"
        )
    return SwitchedHamiltonian(h_list, dims, schedule.detection_times)
