"""Beams of pairs: per-pair birth/detection times, frequency averages, sub-beams.

A beam of N pairs is a tensor product of single-pair states, but it is never
materialized as one 4^N vector: identity factors trace out of frequency
operators, so the averaged pair observable reduces to the arithmetic mean of
per-pair expectations, and the sub-beam of particles #1 is just the list of
per-pair reduced matrices. The explicit 4^N construction survives only as a
small-N test oracle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import qstate
from .dynamics import switched_pair_state
from .hamfun import HamiltonianFunction


@dataclass(frozen=True)
class BeamSpec:
    """N pairs sharing one initial state and Hamiltonian pair.

    Each row of ``times`` is (t0, t1, t2): birth time and the two detection
    times, with t0 <= t1 and t0 <= t2.
    """

    psi0: np.ndarray
    h1: HamiltonianFunction
    h2: HamiltonianFunction
    times: np.ndarray

    def __post_init__(self):
        psi0 = qstate.check_state(self.psi0)
        if psi0.size != 4:
            raise ValueError("beam pairs must be two-qubit states")
        psi0 = psi0.copy()
        psi0.setflags(write=False)
        object.__setattr__(self, "psi0", psi0)
        t = np.asarray(self.times, dtype=float)
        if t.ndim != 2 or t.shape[1] != 3 or t.shape[0] < 1:
            raise ValueError("times must be an (n_pairs, 3) array of (t0, t1, t2)")
        if np.any(t[:, 1] < t[:, 0]) or np.any(t[:, 2] < t[:, 0]):
            raise ValueError("each pair needs t0 <= t1 and t0 <= t2")
        t = t.copy()
        t.setflags(write=False)
        object.__setattr__(self, "times", t)

    @classmethod
    def from_flight_times(cls, psi0, h1, h2, birth_times, flight1, flight2) -> "BeamSpec":
        """Build from birth times and times of flight dt_k = t_k - t0."""
        t0 = np.asarray(birth_times, dtype=float)
        d1 = np.broadcast_to(np.asarray(flight1, dtype=float), t0.shape)
        d2 = np.broadcast_to(np.asarray(flight2, dtype=float), t0.shape)
        if np.any(d1 < 0) or np.any(d2 < 0):
            raise ValueError("times of flight must be >= 0")
        return cls(psi0, h1, h2, np.column_stack([t0, t0 + d1, t0 + d2]))

    @property
    def n_pairs(self) -> int:
        return self.times.shape[0]


def frequency_average(pair_obs, pair_states) -> float:
    """Beam average of a pair observable without building the 4^N operator.

    The frequency form (1/N) sum_i O_i with identity on every other pair has,
    on a product state, exactly the arithmetic mean of per-pair expectations.
    """
    obs = qstate.check_hermitian(pair_obs, name="pair observable")
    states = list(pair_states)
    if not states:
        raise ValueError("need at least one pair state")
    return float(np.mean([qstate.expectation(np.asarray(s, dtype=complex), obs) for s in states]))


def sub_beam_state(beam: BeamSpec, t: float) -> list[np.ndarray]:
    """Reduced states of the particles #1 at time t, one matrix per pair.

    Pair i evolves from its own birth time; each factor accumulates only its
    switched-on duration, so the result is independent of every t2 (and a
    pair not yet born sits in its initial reduced state). Computed through
    the composite pair state so that independence is a property of the
    dynamics, not of the code path.
    """
    out = []
    for t0, t1, t2 in beam.times:
        tau1 = max(0.0, min(t, t1) - t0)
        tau2 = max(0.0, min(t, t2) - t0)
        psi_t = switched_pair_state(beam.psi0, beam.h1, beam.h2, tau1, tau2)
        out.append(qstate.partial_trace(np.outer(psi_t, psi_t.conj()), (2, 2), keep=1))
    return out
