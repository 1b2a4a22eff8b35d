"""Measurement protocols for two-time correlations on entangled qubit pairs.

Two rival recipes for the joint statistics of measuring particle #1 at t1 and
particle #2 at t2 > t1:

* the switching protocol keeps the joint evolution unitary and simply shuts
  each particle's generator off at its detection time, reading all outcome
  probabilities from the final frozen state;
* the Zeno protocol projects the joint state at t1, renormalizes each branch
  and lets particle #2 continue with the branch-conditioned generator.

For bilinear (linear quantum mechanics) Hamiltonian functions the two agree
identically; for genuinely nonlinear functions the Zeno route develops a
nonlocal response of particle #2 to the distant measurement while the
switching route stays local.

Also here: multi-time history probabilities in their unitary-filter and
Heisenberg-projected forms, and a pre/post-selection mean-field demonstration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import qstate
from .dynamics import (
    Trajectory,
    one_particle_propagator,
    propagator_family,
    switched_pair_state,
)
from .hamfun import HamiltonianFunction, kappa

PROJECTOR_TOL = 1e-12
DEAD_BRANCH_TOL = 1e-14
TABLE_SUM_TOL = 1e-10
CORRELATOR_TOL = 1e-10


# ---------------------------------------------------------------------------
# histories


@dataclass(frozen=True)
class HistorySpec:
    """Ordered projective events riding on one free unitary evolution.

    ``projectors`` is a sequence of (time, projector) pairs with strictly
    increasing times; ``free_generator`` drives the evolution between events.
    """

    projectors: tuple[tuple[float, np.ndarray], ...]
    free_generator: np.ndarray
    final_time: float

    def __post_init__(self):
        gen = qstate.check_hermitian(self.free_generator, name="free generator")
        events = []
        prev = 0.0
        for i, (t, e) in enumerate(self.projectors):
            t = float(t)
            if t < 0 or (i > 0 and t <= prev):
                raise ValueError("projector times must be positive and strictly increasing")
            prev = t
            e = qstate.check_hermitian(e, name=f"projector {i}")
            if np.max(np.abs(e @ e - e)) > PROJECTOR_TOL:
                raise ValueError(f"projector {i} is not idempotent to {PROJECTOR_TOL:.1e}")
            if e.shape != gen.shape:
                raise ValueError("projector and generator dimensions differ")
            events.append((t, e))
        if not events:
            raise ValueError("history needs at least one projector")
        if self.final_time < prev:
            raise ValueError("final_time must not precede the last projector")
        object.__setattr__(self, "projectors", tuple(events))
        object.__setattr__(self, "free_generator", gen)


def history_probability_unitary(spec: HistorySpec, rho0) -> float:
    """History probability from the overall evolution operator.

    Builds K = E_n U(t_n - t_{n-1}) ... E_1 U(t_1) out of forward propagators
    and returns Tr(K rho0 K^dag); the free stretch after the last event is
    unitary and drops out of the trace.
    """
    rho0 = qstate.check_density_matrix(rho0)
    k = qstate.identity(rho0.shape[0])
    prev = 0.0
    for t, e in spec.projectors:
        k = e @ qstate.herm_exp(spec.free_generator, -1j * (t - prev)) @ k
        prev = t
    val = np.trace(k @ rho0 @ k.conj().T)
    return float(val.real)


def history_probability_projected(spec: HistorySpec, rho0) -> float:
    """Same probability through Heisenberg-rotated projectors.

    Evaluates Tr(E_n(t_n) ... E_1(t_1) rho0 E_1(t_1) ... E_n(t_n)) with
    E(t) = U(t)^dag E U(t); equal to the unitary route by the group law of
    the free evolution.
    """
    rho0 = qstate.check_density_matrix(rho0)
    chain = qstate.identity(rho0.shape[0])
    for t, e in spec.projectors:
        u = qstate.herm_exp(spec.free_generator, -1j * t)
        chain = (u.conj().T @ e @ u) @ chain
    val = np.trace(chain @ rho0 @ chain.conj().T)
    return float(val.real)


# ---------------------------------------------------------------------------
# outcome tables


@dataclass(frozen=True)
class MeasurementOutcomeTable:
    """Joint +-/-+ outcome probabilities of a two-particle spin measurement.

    ``correlator`` is the <X (x) Y> value; for spin observables along the
    measurement directions it must equal sum_{s,s'} s s' p(s,s'), which is
    validated on construction.
    """

    outcomes: dict[tuple[int, int], float]
    marginals: dict[str, dict[int, float]]
    correlator: float
    dead_branches: tuple[int, ...] = ()
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        probs = self.outcomes
        for key in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
            if key not in probs:
                raise ValueError(f"outcome table is missing {key}")
            p = probs[key]
            if p < -1e-12 or p > 1 + 1e-12:
                raise ValueError(f"probability {p!r} for {key} outside [0, 1]")
        total = sum(probs.values())
        if abs(total - 1.0) > TABLE_SUM_TOL:
            raise ValueError(f"outcome probabilities sum to {total!r}, not 1")
        implied = sum(sa * sb * p for (sa, sb), p in probs.items())
        if abs(implied - self.correlator) > CORRELATOR_TOL:
            raise ValueError(
                f"correlator {self.correlator!r} inconsistent with outcome table value {implied!r}; "
                "observables must be the unit spins along the measurement directions"
            )

    def marginal(self, particle: str, sign: int) -> float:
        return self.marginals[particle][sign]


def _assemble_table(outcomes: dict[tuple[int, int], float], correlator: float,
                    dead: tuple[int, ...] = (), metadata: dict | None = None) -> MeasurementOutcomeTable:
    marg = {
        "first": {s: outcomes[(s, 1)] + outcomes[(s, -1)] for s in (1, -1)},
        "second": {s: outcomes[(1, s)] + outcomes[(-1, s)] for s in (1, -1)},
    }
    return MeasurementOutcomeTable(
        outcomes=outcomes, marginals=marg, correlator=correlator,
        dead_branches=dead, metadata=metadata or {},
    )


# ---------------------------------------------------------------------------
# the two rival protocols


def _validate_protocol_times(t1: float, t2: float, ordered: bool = True):
    if not (t1 >= 0 and t2 >= 0):
        raise ValueError("detection times must be >= 0")
    if ordered and not t1 <= t2:
        raise ValueError("need t1 <= t2")


def switching_correlator(psi0, h1: HamiltonianFunction, h2: HamiltonianFunction,
                         t1: float, t2: float, obs_x, obs_y,
                         directions) -> MeasurementOutcomeTable:
    """Joint outcome table of the switching protocol.

    Evolves to the frozen state (each factor switched off at its own
    detection time), reads p(s, s') = <E_s (x) E_s'> there, and the
    correlator from <X (x) Y>. ``directions`` is the pair of measurement
    axes; ``obs_x``/``obs_y`` are the single-particle observables (unit
    spins along those axes for a consistent table).
    """
    _validate_protocol_times(t1, t2)
    if not (math.isfinite(t1) and math.isfinite(t2)):
        raise ValueError("outcome tables need finite detection times on both particles")
    obs_x = qstate.check_hermitian(obs_x, name="obs_x")
    obs_y = qstate.check_hermitian(obs_y, name="obs_y")
    dir_a, dir_b = directions
    ea = qstate.projector(dir_a)
    eb = qstate.projector(dir_b)
    psi_f = switched_pair_state(psi0, h1, h2, t1, t2)
    outcomes = {}
    for sa, eaop in zip((1, -1), ea):
        for sb, ebop in zip((1, -1), eb):
            outcomes[(sa, sb)] = qstate.expectation(psi_f, np.kron(eaop, ebop))
    corr = qstate.expectation(psi_f, np.kron(obs_x, obs_y))
    return _assemble_table(outcomes, corr, metadata={"protocol": "switching", "t1": t1, "t2": t2})


def zeno_branches(psi0, h1, h2, t1, direction_a):
    """Joint state at t1 and the renormalized +- branches of the projection.

    Returns ``(psi_t1, [(sign, weight, state or None), ...])``; a branch whose
    projection weight falls below ``DEAD_BRANCH_TOL`` carries ``None``.
    """
    psi_t1 = switched_pair_state(psi0, h1, h2, t1, t1)
    eye2 = qstate.identity(2)
    branches = []
    for sign, e in zip((1, -1), qstate.projector(direction_a)):
        v = np.kron(e, eye2) @ psi_t1
        w = float(np.vdot(v, v).real)
        if w < DEAD_BRANCH_TOL:
            branches.append((sign, 0.0, None))
        else:
            branches.append((sign, w, v / np.sqrt(w)))
    return psi_t1, branches


def zeno_correlator(psi0, h1: HamiltonianFunction, h2: HamiltonianFunction,
                    t1: float, t2: float, direction_a, direction_b) -> MeasurementOutcomeTable:
    """Joint outcome table of the Zeno-projection protocol.

    Evolves jointly (unswitched) to t1, projects particle #1 along
    ``direction_a`` and renormalizes each branch, then evolves particle #2
    alone from the branch-conditioned reduced state to t2. The joint
    probability is the branch weight times the conditional probability.
    Branches annihilated by the projection (weight below ``DEAD_BRANCH_TOL``)
    contribute zero and are flagged in ``dead_branches``.
    """
    _validate_protocol_times(t1, t2)
    if not (math.isfinite(t1) and math.isfinite(t2)):
        raise ValueError("outcome tables need finite detection times on both particles")
    eye2 = qstate.identity(2)
    _, branches = zeno_branches(psi0, h1, h2, t1, direction_a)
    ea_by_sign = dict(zip((1, -1), qstate.projector(direction_a)))
    eb = qstate.projector(direction_b)
    outcomes = {}
    dead = []
    for sign_a, w, v in branches:
        if v is None:
            dead.append(sign_a)
            for sb in (1, -1):
                outcomes[(sign_a, sb)] = 0.0
            continue
        rho2 = qstate.partial_trace(np.outer(v, v.conj()), (2, 2), keep=2)
        u2 = one_particle_propagator(h2, rho2, t2 - t1)
        vt = np.kron(eye2, u2) @ v
        for sb, ebop in zip((1, -1), eb):
            outcomes[(sign_a, sb)] = w * qstate.expectation(vt, np.kron(ea_by_sign[sign_a], ebop))
    corr = sum(sa * sb * p for (sa, sb), p in outcomes.items())
    return _assemble_table(outcomes, corr, dead=tuple(dead),
                           metadata={"protocol": "zeno", "t1": t1, "t2": t2})


def ensemble_average_trajectory(protocol: str, psi0, h1: HamiltonianFunction,
                                h2: HamiltonianFunction, t1: float, t2: float,
                                observables: dict[str, np.ndarray], t_grid,
                                direction_a=(1.0, 0.0, 0.0),
                                branch: str | int = "mixture") -> Trajectory:
    """Observable averages along either protocol on a time grid.

    Switching: single-branch expectations in the switched state. Zeno: for
    t <= t1 the joint unswitched evolution; afterwards the
    probability-weighted mixture over the two projection branches (pass
    ``branch=+1`` or ``-1`` to follow a single normalized branch instead).
    The t1 measurement direction defaults to x. The switching protocol
    accepts any pair of times (including +inf, never detected); the Zeno
    protocol needs a finite t1 <= t2.
    """
    _validate_protocol_times(t1, t2, ordered=(protocol == "zeno"))
    if protocol == "zeno" and not math.isfinite(t1):
        raise ValueError("the Zeno protocol needs a finite measurement time t1")
    psi0 = qstate.check_state(psi0)
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size < 1 or np.any(np.diff(t_grid) <= 0) or t_grid[0] < 0:
        raise ValueError("t_grid must be non-negative and strictly increasing")
    obs = {name: qstate.check_hermitian(op, name=f"observable {name!r}")
           for name, op in observables.items()}
    rho = np.outer(psi0, psi0.conj())
    rho1 = qstate.partial_trace(rho, (2, 2), keep=1)
    rho2 = qstate.partial_trace(rho, (2, 2), keep=2)
    eye2 = qstate.identity(2)
    values = {name: np.empty(t_grid.size) for name in obs}
    meta = {"protocol": protocol, "t1": t1, "t2": t2,
            "hamiltonians": (h1.label, h2.label)}

    if protocol == "switching":
        fam1 = propagator_family(h1, rho1, {kappa(t, t1) for t in t_grid})
        fam2 = propagator_family(h2, rho2, {kappa(t, t2) for t in t_grid})
        states = np.empty((t_grid.size, psi0.size), dtype=complex)
        for i, t in enumerate(t_grid):
            states[i] = np.kron(fam1[kappa(t, t1)], fam2[kappa(t, t2)]) @ psi0
        for name, op in obs.items():
            values[name] = np.einsum("ti,ij,tj->t", states.conj(), op, states).real
        meta["integrator"] = "closed-form switched propagator"
        return Trajectory(times=t_grid, states=states, observables=values, metadata=meta)

    if protocol != "zeno":
        raise ValueError(f"unknown protocol {protocol!r}")

    pre_mask = t_grid <= t1
    fam1 = propagator_family(h1, rho1, {t for t in t_grid[pre_mask]})
    fam2 = propagator_family(h2, rho2, {t for t in t_grid[pre_mask]})
    _, branches = zeno_branches(psi0, h1, h2, t1, direction_a)
    post_taus = {min(t, t2) - t1 for t in t_grid[~pre_mask]}
    branch_data = []
    for sign, w, v in branches:
        if v is None:
            branch_data.append((sign, 0.0, None, None))
            continue
        rho2_b = qstate.partial_trace(np.outer(v, v.conj()), (2, 2), keep=2)
        fam_b = propagator_family(h2, rho2_b, post_taus)
        branch_data.append((sign, w, v, fam_b))

    if branch != "mixture":
        selected = [b for b in branch_data if b[0] == branch]
        if not selected or selected[0][2] is None:
            raise ValueError(f"branch {branch!r} unavailable (dead or unknown)")

    states = None
    for i, t in enumerate(t_grid):
        if t <= t1:
            psi_t = np.kron(fam1[t], fam2[t]) @ psi0
            for name, op in obs.items():
                values[name][i] = qstate.expectation(psi_t, op)
            continue
        tau = min(t, t2) - t1
        for name, op in obs.items():
            if branch == "mixture":
                acc = 0.0
                for sign, w, v, fam_b in branch_data:
                    if v is None:
                        continue
                    vt = np.kron(eye2, fam_b[tau]) @ v
                    acc += w * qstate.expectation(vt, op)
                values[name][i] = acc
            else:
                sign, w, v, fam_b = selected[0]
                vt = np.kron(eye2, fam_b[tau]) @ v
                values[name][i] = qstate.expectation(vt, op)

    meta["integrator"] = "closed-form branch mixture"
    meta["direction_a"] = tuple(float(x) for x in np.asarray(direction_a, dtype=float))
    meta["branch"] = branch
    meta["branch_weights"] = tuple(b[1] for b in branch_data)
    return Trajectory(times=t_grid, states=states, observables=values, metadata=meta)


# ---------------------------------------------------------------------------
# pre/post-selection mean-field demonstration


@dataclass(frozen=True)
class TeleportationReport:
    """Mean-field vectors of the selected sub-beam versus the full beam.

    ``b_pre`` and ``b_post`` are exact (coupling times the Bloch vector of
    the conditional and of the full-marginal state of particle #2);
    ``b_sampled`` estimates the mode's beam from simulated per-pair spin
    outcomes, axes assigned round robin.
    """

    selection: str
    n_pairs: int
    n_retained: int
    b_pre: np.ndarray
    b_post: np.ndarray
    b_sampled: np.ndarray
    retained_state: np.ndarray
    coupling: float
    alice_direction: tuple[float, float, float]
    keep_alice_outcome: int


def _bloch(rho) -> np.ndarray:
    return np.array([
        np.trace(rho @ qstate.sigma_x).real,
        np.trace(rho @ qstate.sigma_y).real,
        np.trace(rho @ qstate.sigma_z).real,
    ])


def teleportation_demo(psi_pair, n_pairs: int, selection: str, alice_direction,
                       keep_alice_outcome: int = -1, coupling: float = 1.0,
                       seed: int = 1234) -> TeleportationReport:
    """Compare pre-selected and post-selected beams feeding a mean-field term.

    Pre-selection discards pairs by Alice's sampled outcome on particle #1
    before anything else happens to particle #2: the retained beam is in the
    conditional state, and its mean field can be nonzero even when the full
    beam's vanishes. Post-selection merely relabels complete data afterwards,
    so the field that ever acted is the full ensemble's.
    """
    psi_pair = qstate.check_state(psi_pair)
    if psi_pair.size != 4:
        raise ValueError("expected a two-qubit pair state")
    if n_pairs < 1:
        raise ValueError("n_pairs must be >= 1")
    if selection not in ("pre", "post"):
        raise ValueError("selection must be 'pre' or 'post'")
    if keep_alice_outcome not in (1, -1):
        raise ValueError("keep_alice_outcome must be +1 or -1")
    eplus, eminus = qstate.projector(alice_direction)
    keep_proj = eplus if keep_alice_outcome == 1 else eminus
    rho = np.outer(psi_pair, psi_pair.conj())
    rho_a = qstate.partial_trace(rho, (2, 2), keep=1)
    rho_b_full = qstate.partial_trace(rho, (2, 2), keep=2)

    p_keep = float(np.trace(rho_a @ keep_proj).real)
    raw = np.kron(keep_proj, qstate.identity(2)) @ rho @ np.kron(keep_proj, qstate.identity(2))
    if p_keep < DEAD_BRANCH_TOL:
        raise ValueError("selection rule retains no pairs: Alice never sees that outcome")
    rho_b_cond = qstate.partial_trace(raw / p_keep, (2, 2), keep=2)

    rng = np.random.default_rng(seed)
    alice_keep = rng.random(n_pairs) < p_keep
    n_retained = int(np.count_nonzero(alice_keep))
    if selection == "pre":
        if n_retained == 0:
            raise ValueError("selection retained no pairs in this sample")
        beam_state, beam_size = rho_b_cond, n_retained
    else:
        beam_state, beam_size = rho_b_full, n_pairs

    # empirical mean field: each beam member measures one axis, round robin
    bloch_beam = _bloch(beam_state)
    b_sampled = np.zeros(3)
    for axis in range(3):
        count = beam_size // 3 + (1 if axis < beam_size % 3 else 0)
        if count == 0:
            continue
        p_up = (1.0 + bloch_beam[axis]) / 2
        ups = int(np.count_nonzero(rng.random(count) < p_up))
        b_sampled[axis] = coupling * (2 * ups - count) / count

    return TeleportationReport(
        selection=selection,
        n_pairs=n_pairs,
        n_retained=n_retained if selection == "pre" else n_pairs,
        b_pre=coupling * _bloch(rho_b_cond),
        b_post=coupling * _bloch(rho_b_full),
        b_sampled=b_sampled,
        retained_state=rho_b_cond if selection == "pre" else rho_b_full,
        coupling=coupling,
        alice_direction=tuple(float(x) for x in np.asarray(alice_direction, dtype=float)),
        keep_alice_outcome=keep_alice_outcome,
    )
