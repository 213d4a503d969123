"""Equilibrium and closed-form oscillation / synchronization conditions.

The network has a unique equilibrium with end-product level x0 solving
1/(1 + x^p) = B x, B = prod(b_m).  Linearizing the repression around x0
gives the gain sigma, and the network oscillates when sigma exceeds the
magnitude kappa0 at which the open-loop frequency response crosses the
negative real axis.  The synchronization-manifold analysis applies the
same crossing construction to the coupling mode with eigenvalue v2.
"""

import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .model import CONNECTIVITY_TOL, NetworkModel, OscillatorParams

__all__ = [
    "EquilibriumInfo",
    "OscillationVerdict",
    "SyncVerdict",
    "solve_equilibrium",
    "phase_crossing_frequency",
    "oscillation_condition",
    "z0_max_gain",
    "sync_condition",
    "required_connectivity",
]


@dataclass(frozen=True)
class EquilibriumInfo:
    """Unique positive equilibrium of the end product and linearized gain."""

    x0: float
    B: float
    sigma: float


@dataclass(frozen=True)
class OscillationVerdict:
    """Outcome of the loop-gain oscillation test R = sigma/kappa0 > 1.

    For M <= 2 the phase sum never reaches pi, there is no crossing
    frequency, and the criterion can never certify oscillation; mu,
    kappa0 and R are then None and `reason` explains the outcome.
    """

    R: Optional[float]
    kappa0: Optional[float]
    mu: Optional[float]
    oscillatory: bool
    reason: Optional[str] = None


@dataclass(frozen=True)
class SyncVerdict:
    """Necessary condition for stable synchronized oscillation.

    satisfied means N*z0/(N-1) < kappa2, the crossing magnitude of the
    mode-2 loop.  required_v2 is the smallest algebraic connectivity at
    which the condition holds (None when it already holds at v2 = 0).
    For M <= 2 there is no crossing, the mode-2 loop cannot destabilize,
    and the condition holds trivially: mu2 is None and kappa2 infinite.
    """

    z0: float
    mu2: Optional[float]
    kappa2: float
    threshold: float
    satisfied: bool
    v2: float
    N: int
    required_v2: Optional[float] = None


def _hill(x: float, p: float) -> float:
    return 1.0 / (1.0 + x**p)


def solve_equilibrium(p: float, B: float) -> EquilibriumInfo:
    """Solve 1/(1 + x^p) = B x for the unique positive root.

    The left side decreases from 1 and the right side increases from 0,
    so bisection on [0, 1/B] always brackets exactly one root.
    """
    if p < 1:
        raise ValueError(f"Hill coefficient must be >= 1, got p={p}")
    if not (math.isfinite(B) and B > 0):
        raise ValueError(f"loop gain product B must be finite and positive, got {B}")
    lo, hi = 0.0, 1.0 / B
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        h = _hill(mid, p) - B * mid
        if h > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-16 * max(1.0, hi) and abs(h) < 1e-12:
            break
    x0 = 0.5 * (lo + hi)
    sigma = p * x0 ** (p + 1) * B * B
    return EquilibriumInfo(x0=x0, B=B, sigma=sigma)


def phase_crossing_frequency(
    b: Sequence[float],
    offset_index: Optional[int] = None,
    offset: float = 0.0,
) -> Optional[float]:
    """Minimal w > 0 with sum_m arctan(w / b_m) = pi, or None if no crossing.

    offset_index (0-based) adds `offset` to that term's rate, as needed for
    the coupling-mode loops whose coupled species sees b_k + upsilon_j.
    The phase sum is strictly increasing in w, so the root is unique; it
    exists iff M >= 3 because each term is bounded by pi/2.
    """
    rates = [float(x) for x in b]
    if offset_index is not None:
        rates[offset_index] += offset
    if any(r <= 0 for r in rates):
        raise ValueError("all rates must be strictly positive")
    if len(rates) <= 2:
        return None

    def phase(w: float) -> float:
        return sum(math.atan(w / r) for r in rates) - math.pi

    hi = max(rates)
    while phase(hi) < 0.0:
        hi *= 2.0
    lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if phase(mid) < 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-16 * hi:
            break
    w = 0.5 * (lo + hi)
    # one Newton polish; the derivative sum_m b_m/(b_m^2+w^2) is available in closed form
    slope = sum(r / (r * r + w * w) for r in rates)
    if slope > 0.0:
        w -= phase(w) / slope
    return w


def _crossing_magnitude(rates: Sequence[float], w: float) -> float:
    return math.prod(math.sqrt(w * w + r * r) for r in rates)


def oscillation_condition(osc: OscillatorParams) -> OscillationVerdict:
    """Evaluate R = p B (1 - B x0) / kappa0 and compare against 1."""
    eq = solve_equilibrium(osc.p, osc.B)
    mu = phase_crossing_frequency(osc.b)
    if mu is None:
        return OscillationVerdict(
            R=None,
            kappa0=None,
            mu=None,
            oscillatory=False,
            reason="no phase crossing for M <= 2; criterion cannot certify oscillation",
        )
    kappa0 = _crossing_magnitude(osc.b, mu)
    R = osc.p * osc.B * (1.0 - osc.B * eq.x0) / kappa0
    return OscillationVerdict(R=R, kappa0=kappa0, mu=mu, oscillatory=R > 1.0)


def z0_max_gain(p: float) -> float:
    """Maximum over x > 0 of p x^(p-1) / (1 + x^p)^2.

    For p > 1 the maximizer is x* = ((p-1)/(p+1))^(1/p); for p = 1 the
    supremum 1 is approached as x -> 0+.
    """
    if p < 1:
        raise ValueError(f"Hill coefficient must be >= 1, got p={p}")
    if p == 1.0:
        return 1.0
    xstar = ((p - 1.0) / (p + 1.0)) ** (1.0 / p)
    return xstar ** (p - 1.0) * (p + 1.0) ** 2 / (4.0 * p)


def _kappa_mode(b: Sequence[float], k_pos: int, v: float) -> Optional[float]:
    """Crossing magnitude of the coupling-mode loop with rate offset v at k_pos.

    Every factor is evaluated at that mode's own crossing frequency.
    """
    mu = phase_crossing_frequency(b, offset_index=k_pos, offset=v)
    if mu is None:
        return None
    rates = [float(x) for x in b]
    rates[k_pos] += v
    return _crossing_magnitude(rates, mu)


def sync_condition(net: NetworkModel, include_required: bool = True) -> SyncVerdict:
    """Necessary condition N z0/(N-1) < kappa2 for stable synchronized oscillation."""
    if net.N < 2:
        raise ValueError("synchronization analysis needs at least two oscillators")
    v2 = net.coupling.v2
    if v2 is None or v2 <= CONNECTIVITY_TOL:
        raise ValueError(
            "coupling is disconnected (v2 = 0); synchronization manifold analysis inapplicable"
        )
    osc, k_pos = net.osc, net.k - 1
    z0 = z0_max_gain(osc.p)
    threshold = net.N * z0 / (net.N - 1.0)
    mu2 = phase_crossing_frequency(osc.b, offset_index=k_pos, offset=v2)
    if mu2 is None:
        # no crossing: the mode-2 loop cannot destabilize, condition holds
        return SyncVerdict(
            z0=z0,
            mu2=None,
            kappa2=math.inf,
            threshold=threshold,
            satisfied=True,
            v2=v2,
            N=net.N,
            required_v2=None,
        )
    rates = list(osc.b)
    rates[k_pos] += v2
    kappa2 = _crossing_magnitude(rates, mu2)
    required = None
    if include_required:
        req = required_connectivity(osc, net.N, net.k)
        required = req if req > 0.0 else None
    return SyncVerdict(
        z0=z0,
        mu2=mu2,
        kappa2=kappa2,
        threshold=threshold,
        satisfied=threshold < kappa2,
        v2=v2,
        N=net.N,
        required_v2=required,
    )


def required_connectivity(osc: OscillatorParams, N: int, k: int) -> float:
    """Smallest v2 >= 0 at which the synchronization condition holds.

    kappa2 increases with v2, so the minimum is found by bracketing and
    bisection to 1e-6 relative; returns 0 when the condition already
    holds at v2 = 0.
    """
    if N < 2:
        raise ValueError("need at least two oscillators")
    if not (2 <= k <= osc.M):
        raise ValueError(f"coupled species index must satisfy 2 <= k <= M={osc.M}, got k={k}")
    k_pos = k - 1
    threshold = N * z0_max_gain(osc.p) / (N - 1.0)

    if _kappa_mode(osc.b, k_pos, 0.0) is None:
        return 0.0  # no crossing: condition holds at any connectivity

    def gap(v: float) -> float:
        return _kappa_mode(osc.b, k_pos, v) - threshold

    if gap(0.0) >= 0.0:
        return 0.0
    hi = 1.0
    while gap(hi) < 0.0:
        hi *= 2.0
        if hi > 1e12:
            raise RuntimeError("failed to bracket the required connectivity")
    lo = 0.0
    while hi - lo > 1e-6 * hi:
        mid = 0.5 * (lo + hi)
        if gap(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
