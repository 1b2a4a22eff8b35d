"""Generalized entropies and Kolmogorov-Nagumo (KN) averages.

Shannon and Renyi information measures, Tsallis entropy with its escort
distributions and q-internal energy, and KN quasi-linear averages
phi^-1(sum p_k phi(x_k)) both for classical values and spectrally for quantum
observables. Conventions: 0 log(1/0) := 0 and 0^q := 0 for q > 0; the log
base is an explicit parameter, defaulting to 2 for information quantities
while Tsallis entropy uses the natural log. Hartley information log(N/N_k)
is the deterministic special case of ``shannon_entropy`` on empirical count
distributions and gets no separate entry point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import qstate

DIST_SUM_TOL = 1e-12
DIST_NEG_TOL = -1e-14
KN_ROUNDTRIP_TOL = 1e-10


def _as_distribution(weights) -> np.ndarray:
    p = np.asarray(weights, dtype=float)
    if p.ndim != 1 or p.size < 1:
        raise ValueError("probability distribution must be a 1-d sequence")
    if np.any(p < DIST_NEG_TOL):
        raise ValueError(f"negative probability below {DIST_NEG_TOL:.1e}")
    total = p.sum()
    if abs(total - 1.0) > DIST_SUM_TOL:
        raise ValueError(f"probabilities sum to {total!r}, not 1")
    return np.clip(p, 0.0, None)


def shannon_entropy(weights, base: float = 2.0) -> float:
    """sum_k p_k log_base(1/p_k) with the 0 log(1/0) := 0 convention."""
    if base <= 1:
        raise ValueError("log base must exceed 1")
    p = _as_distribution(weights)
    nz = p[p > 0]
    return float(-(nz * np.log(nz)).sum() / math.log(base))


@dataclass(frozen=True)
class KNFunction:
    """Strictly monotonic map with inverse, the kernel of a KN average.

    ``domain`` bounds the arguments phi accepts; the inverse is verified
    against phi on a sample grid at construction (tolerance 1e-10).
    """

    forward: Callable[[float], float]
    inverse: Callable[[float], float]
    label: str
    domain: tuple[float, float] = (-math.inf, math.inf)

    def __post_init__(self):
        lo = max(self.domain[0], -8.0)
        hi = min(self.domain[1], 8.0)
        if not lo < hi:
            raise ValueError("KN function domain is empty")
        for x in np.linspace(lo, hi, 17):
            back = self.inverse(self.forward(float(x)))
            if abs(back - x) > KN_ROUNDTRIP_TOL:
                raise ValueError(
                    f"inverse fails roundtrip at x={x!r}: phi^-1(phi(x)) = {back!r}"
                )

    def check_domain(self, values: np.ndarray):
        lo, hi = self.domain
        if np.any(values < lo) or np.any(values > hi):
            raise ValueError(f"values outside KN domain [{lo}, {hi}]")


def kn_linear() -> KNFunction:
    return KNFunction(lambda x: x, lambda y: y, "linear")


def kn_sqrt() -> KNFunction:
    return KNFunction(math.sqrt, lambda y: y * y, "sqrt", domain=(0.0, math.inf))


def kn_exponential(alpha: float, base: float = 2.0) -> KNFunction:
    """phi(x) = base^((1-alpha) x), the exponential KN family.

    Together with affine maps of the identity these are the only KN kernels
    compatible with additivity of information; this one turns the Shannon
    random variable into the Renyi alpha-entropy.
    """
    if alpha == 1:
        raise ValueError("alpha = 1 degenerates to the linear kernel")
    if base <= 1:
        raise ValueError("base must exceed 1")
    scale = (1 - alpha) * math.log(base)
    return KNFunction(
        lambda x: math.exp(scale * x),
        lambda y: math.log(y) / scale,
        f"exp[alpha={alpha:g}, base={base:g}]",
    )


def kn_affine(phi: KNFunction, a: float, b: float) -> KNFunction:
    """a phi + b; leaves every KN average invariant for a != 0."""
    if a == 0:
        raise ValueError("affine scale must be nonzero")
    return KNFunction(
        lambda x: a * phi.forward(x) + b,
        lambda y: phi.inverse((y - b) / a),
        f"{a:g}*{phi.label}+{b:g}",
        domain=phi.domain,
    )


def kn_average(values, weights, phi: KNFunction) -> float:
    """phi^-1(sum_k p_k phi(x_k))."""
    p = _as_distribution(weights)
    x = np.asarray(values, dtype=float)
    if x.shape != p.shape:
        raise ValueError("values and weights must have matching length")
    phi.check_domain(x)
    acc = sum(pk * phi.forward(float(xk)) for pk, xk in zip(p, x))
    return float(phi.inverse(acc))


def renyi_entropy(weights, alpha: float, base: float = 2.0, limit: bool = False) -> float:
    """(1/(1-alpha)) log_base(sum_k p_k^alpha) for alpha > 0, alpha != 1.

    With ``limit=True`` the alpha = 1 point returns the Shannon entropy in
    the same base instead of raising.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if base <= 1:
        raise ValueError("log base must exceed 1")
    p = _as_distribution(weights)
    if alpha == 1:
        if limit:
            return shannon_entropy(p, base)
        raise ValueError("alpha = 1 undefined in strict mode; pass limit=True for Shannon")
    nz = p[p > 0]
    return float(math.log((nz**alpha).sum()) / ((1 - alpha) * math.log(base)))


def kn_quantum_average(rho, obs, phi: KNFunction) -> float:
    """phi^-1(Tr rho phi(X)) with phi applied spectrally to the observable."""
    rho = qstate.check_density_matrix(rho)
    w, v = qstate.eigh(obs)
    phi.check_domain(w)
    phi_obs = (v * np.array([phi.forward(float(x)) for x in w])) @ v.conj().T
    inner = np.trace(rho @ phi_obs).real
    return float(phi.inverse(inner))


def kn_decomposition_check(p_plus: float) -> tuple[float, float]:
    """Both sides of the sqrt-kernel split of the quadratic pair energy.

    lhs = (p+ - p-)^2; rhs rebuilds it from one KN average with phi = sqrt
    over the values {9, 1} minus a linear average: they agree identically.
    """
    if not 0 <= p_plus <= 1:
        raise ValueError("p_plus must lie in [0, 1]")
    p_minus = 1.0 - p_plus
    lhs = (p_plus - p_minus) ** 2
    phi = kn_sqrt()
    rhs = kn_average([9.0, 1.0], [p_plus, p_minus], phi) - 4.0 * (p_plus - p_minus) - 4.0
    return lhs, rhs


def tsallis_entropy(weights, q: float, limit: bool = False) -> float:
    """(sum_k p_k^q - 1)/(1 - q); natural-log Shannon at q = 1 in limit mode."""
    p = _as_distribution(weights)
    if q == 1:
        if limit:
            return shannon_entropy(p, base=math.e)
        raise ValueError("q = 1 undefined in strict mode; pass limit=True for Shannon")
    nz = p[p > 0]
    return float(((nz**q).sum() - 1.0) / (1.0 - q))


def escort_distribution(weights, q: float) -> np.ndarray:
    """P_k = p_k^q / sum_j p_j^q, the q-deformed weights."""
    if q <= 0:
        raise ValueError("q must be positive")
    p = _as_distribution(weights)
    pq = np.where(p > 0, p**q, 0.0)
    total = pq.sum()
    if total <= 0:
        raise ValueError("escort distribution undefined for an all-zero input")
    return pq / total


def q_internal_energy(weights, energies, q: float) -> float:
    """Escort-weighted mean sum_k P_k^(q) E_k."""
    e = np.asarray(energies, dtype=float)
    p = _as_distribution(weights)
    if e.shape != p.shape:
        raise ValueError("energies and weights must have matching length")
    return float(np.dot(escort_distribution(p, q), e))
