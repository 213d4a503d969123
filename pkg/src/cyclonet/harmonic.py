"""Multivariable harmonic balance for the collective oscillation.

The synchronized solution ansatz x_M = alpha + beta sin(w t + phi) turns
the repression f into two equivalent gains: xi for the mean component and
eta for the first harmonic.  Balancing both harmonics through the loop
forces xi = prod(b_m), eta = -kappa0 and w = mu, the phase-crossing
frequency, giving the collective period 2 pi / mu.  Marginal stability of
the two surrogate linear systems (gain xi resp. eta in place of f)
certifies that the predicted oscillation is attracting: their mode-1 pole
sets must contain s = 0 resp. s = +/- j mu while every other pole stays
strictly in the left half plane.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .analysis import oscillation_condition, phase_crossing_frequency, solve_equilibrium
from .model import CouplingLaplacian, NetworkModel, OscillatorParams
from .polyroots import aberth_roots, expand_from_linear_factors, polyval

__all__ = [
    "DescribingGains",
    "PeriodEstimate",
    "describing_functions",
    "solve_balance_gains",
    "solve_amplitudes",
    "surrogate_poles",
    "estimate_period",
]

# Pole classification bands: "on the axis" vs "strictly stable".  Values
# between the two count as indeterminate and fail the marginal verdict.
AXIS_TOL = 1e-8
STABLE_TOL = -1e-9


@dataclass(frozen=True)
class DescribingGains:
    """Equivalent gains of f for the harmonic ansatz alpha + beta sin t."""

    xi: float
    eta: float
    alpha: float
    beta: float


@dataclass(frozen=True)
class PeriodEstimate:
    """Harmonic-balance period prediction with surrogate stability data."""

    mu: float
    period_dimensionless: float
    period_dimensional: float
    xi: float
    eta: float
    g0_marginal: bool
    g1_marginal: bool
    pole_sets: dict


def _hill(x: float, p: float) -> float:
    return 1.0 / (1.0 + max(x, 0.0) ** p)


def _adaptive_simpson(g, a, b, tol, fa, fm, fb, depth):
    m = 0.5 * (a + b)
    lm, rm = 0.5 * (a + m), 0.5 * (m + b)
    flm, frm = g(lm), g(rm)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    err = left + right - whole
    if abs(err) <= 15.0 * tol or depth <= 0:
        return left + right + err / 15.0
    return _adaptive_simpson(g, a, m, 0.5 * tol, fa, flm, fm, depth - 1) + _adaptive_simpson(
        g, m, b, 0.5 * tol, fm, frm, fb, depth - 1
    )


def _integrate_periodic(g, tol: float = 1e-11) -> float:
    """Integral of g over one period [-pi, pi].

    Adaptive Simpson with a dense-trapezoid fallback; the trapezoid rule is
    spectrally accurate for smooth periodic integrands, so the fallback is
    effectively exact.
    """
    a, b = -math.pi, math.pi
    fa, fb = g(a), g(b)
    fm = g(0.0)
    val = _adaptive_simpson(g, a, b, tol, fa, fm, fb, depth=48)
    if math.isfinite(val):
        return val
    n = 1 << 20
    t = np.linspace(a, b, n, endpoint=False)
    return float(np.mean([g(x) for x in t]) * (b - a))


def describing_functions(p: float, alpha: float, beta: float) -> DescribingGains:
    """Mean and first-harmonic gains of f(x) = 1/(1+x^p) on alpha + beta sin t.

    Requires alpha > beta >= 0 so the ansatz stays a positive concentration.
    At beta = 0 the exact limits f(alpha)/alpha and f'(alpha) are returned.
    """
    if alpha <= 0:
        raise ValueError(f"mean amplitude must be positive, got alpha={alpha}")
    if beta < 0:
        raise ValueError(f"first-harmonic amplitude must be nonnegative, got beta={beta}")
    if beta > 0 and alpha - beta <= 0:
        raise ValueError(
            f"need alpha > beta for a nonnegative concentration, got alpha={alpha}, beta={beta}"
        )
    if beta == 0.0:
        fa = _hill(alpha, p)
        fprime = -p * alpha ** (p - 1.0) * fa * fa
        return DescribingGains(xi=fa / alpha, eta=fprime, alpha=alpha, beta=0.0)
    mean_integral = _integrate_periodic(lambda t: _hill(alpha + beta * math.sin(t), p))
    first_integral = _integrate_periodic(
        lambda t: _hill(alpha + beta * math.sin(t), p) * math.sin(t)
    )
    xi = mean_integral / (2.0 * math.pi * alpha)
    eta = first_integral / (math.pi * beta)
    return DescribingGains(xi=xi, eta=eta, alpha=alpha, beta=beta)


def solve_balance_gains(osc: OscillatorParams):
    """Gains (xi, eta, mu) of the synchronized harmonic-balance solution.

    xi = prod(b_m); mu is the phase-crossing frequency; eta = -kappa0, the
    (negative real) value of prod(j mu + b_m).
    """
    mu = phase_crossing_frequency(osc.b)
    if mu is None:
        raise ValueError("no crossing frequency: harmonic balance needs M >= 3")
    xi = osc.B
    eta = -math.prod(math.sqrt(mu * mu + bm * bm) for bm in osc.b)
    return xi, eta, mu


_RESTART_GRID = (
    (1.0, 0.5),
    (1.0, 0.1),
    (1.0, 0.9),
    (2.0, 0.5),
    (2.0, 0.9),
    (4.0, 0.7),
    (8.0, 0.9),
    (0.5, 0.3),
)


def solve_amplitudes(osc: OscillatorParams, tol: float = 1e-9):
    """Amplitudes (alpha, beta) solving xi(alpha,beta)=prod(b), eta(alpha,beta)=-kappa0.

    Damped Newton on the open set {alpha > 0, 0 < beta < alpha} from a fixed
    list of restarts; returns None when no interior solution is found,
    which happens for strongly nonsinusoidal (relaxation-like) regimes
    where the positive-concentration ansatz cannot carry the required
    first-harmonic gain.
    """
    verdict = oscillation_condition(osc)
    if not verdict.oscillatory:
        raise ValueError("amplitude solve requires the oscillation condition R > 1")
    xi_target, eta_target, _ = solve_balance_gains(osc)
    x0 = solve_equilibrium(osc.p, osc.B).x0
    scale = math.hypot(abs(xi_target), abs(eta_target))

    def residual(a, be):
        g = describing_functions(osc.p, a, be)
        return np.array([g.xi - xi_target, g.eta - eta_target])

    def jacobian(a, be, F):
        # central differences with probe steps shrunk to stay inside 0 < beta < alpha
        J = np.empty((2, 2))
        ha = min(1e-6 * max(1.0, a), 0.4 * (a - be), 0.4 * a)
        hb = min(1e-6 * max(1.0, be), 0.4 * (a - be), 0.4 * be)
        J[:, 0] = (residual(a + ha, be) - residual(a - ha, be)) / (2.0 * ha)
        J[:, 1] = (residual(a, be + hb) - residual(a, be - hb)) / (2.0 * hb)
        return J

    for fac, ratio in _RESTART_GRID:
        a, be = fac * x0, ratio * fac * x0
        stalled = 0
        prev = math.inf
        for _ in range(50):
            F = residual(a, be)
            rnorm = math.hypot(*F)
            if rnorm / scale < tol:
                return a, be
            # iterates pinned against beta = alpha mean the sinusoid ansatz
            # cannot reach the targets from this start
            if (a - be) / a < 1e-9:
                break
            stalled = stalled + 1 if rnorm > 0.999 * prev else 0
            if stalled >= 3:
                break
            prev = rnorm
            try:
                step = np.linalg.solve(jacobian(a, be, F), -F)
            except np.linalg.LinAlgError:
                break
            lam = 1.0
            accepted = False
            for _ in range(50):
                an, ben = a + lam * step[0], be + lam * step[1]
                if an > 0 and 0 < ben < an:
                    if math.hypot(*residual(an, ben)) < rnorm:
                        accepted = True
                        break
                lam *= 0.5
            if not accepted:
                break
            a, be = a + lam * step[0], be + lam * step[1]
        if math.hypot(*residual(a, be)) / scale < tol:
            return a, be
    return None


def surrogate_poles(osc: OscillatorParams, coupling: CouplingLaplacian, k: int, gain: float):
    """Per-mode pole sets of the constant-gain surrogate loop.

    For mode j the poles are the roots of
    (s + b_k + upsilon_j) prod_{m != k} (s + b_m) - gain = 0;
    gain = xi gives the zero-order surrogate, gain = eta the first-order
    one.  Returns a list with one complex root array per coupling mode.
    """
    if not (2 <= k <= osc.M):
        raise ValueError(f"coupled species index must satisfy 2 <= k <= M={osc.M}, got k={k}")
    others = [bm for m, bm in enumerate(osc.b) if m != k - 1]
    out = []
    for v in coupling.eigenvalues:
        coeffs = expand_from_linear_factors([osc.b[k - 1] + float(v)] + others)
        coeffs[-1] -= gain
        out.append(aberth_roots(coeffs))
    return out


def _classify_marginal(pole_sets, axis_targets):
    """True iff mode 1 holds exactly the intended axis poles and the rest are stable."""
    mode1 = pole_sets[0]
    used = set()
    for target in axis_targets:
        dist = np.abs(mode1 - target)
        order = np.argsort(dist)
        idx = next((i for i in order if i not in used), None)
        if idx is None or dist[idx] >= AXIS_TOL:
            return False
        used.add(idx)
    for j, roots in enumerate(pole_sets):
        for i, s in enumerate(roots):
            if j == 0 and i in used:
                continue
            if s.real >= STABLE_TOL:
                return False
    return True


def estimate_period(net: NetworkModel) -> PeriodEstimate:
    """Collective period 2 pi / mu plus the marginal-stability certificate."""
    osc = net.osc
    xi, eta, mu = solve_balance_gains(osc)
    g0_sets = surrogate_poles(osc, net.coupling, net.k, xi)
    g1_sets = surrogate_poles(osc, net.coupling, net.k, eta)
    g0_marginal = _classify_marginal(g0_sets, [0.0 + 0.0j])
    g1_marginal = _classify_marginal(g1_sets, [1j * mu, -1j * mu])
    return PeriodEstimate(
        mu=mu,
        period_dimensionless=2.0 * math.pi / mu,
        period_dimensional=2.0 * math.pi / (osc.time_scale * mu),
        xi=xi,
        eta=eta,
        g0_marginal=g0_marginal,
        g1_marginal=g1_marginal,
        pole_sets={"g0": g0_sets, "g1": g1_sets},
    )
