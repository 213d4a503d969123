"""Full analysis pipeline assembled into one serializable report.

The report collects the equilibrium, the oscillation and synchronization
verdicts, the harmonic-balance period estimate, the per-mode closed-loop
transfer denominators, and optionally an empirical simulation
cross-check.  Sections that do not apply carry an explicit reason string
instead of being silently dropped, so downstream consumers never skip
rows unknowingly.
"""

import json
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .analysis import (
    EquilibriumInfo,
    OscillationVerdict,
    SyncVerdict,
    oscillation_condition,
    phase_crossing_frequency,
    solve_equilibrium,
    sync_condition,
)
from .harmonic import PeriodEstimate, estimate_period
from .model import CONNECTIVITY_TOL, NetworkModel
from .polyroots import expand_from_linear_factors
from .sim import SimConfig, SimulationResult, run_simulation

__all__ = [
    "ModeTransferData",
    "AnalysisReport",
    "analyze",
    "mode_instability_map",
    "report_to_dict",
    "report_to_json",
]

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class ModeTransferData:
    """Denominator of the mode-j closed-loop transfer function.

    Coefficients are in descending powers of s; the constant term equals
    (b_k + upsilon_j) prod_{m != k} b_m + sigma.
    """

    mode: int
    v: float
    denominator_coeffs: tuple


@dataclass
class AnalysisReport:
    net: NetworkModel
    equilibrium: EquilibriumInfo
    oscillation: OscillationVerdict
    sync: Optional[SyncVerdict]
    period: Optional[PeriodEstimate]
    modes: List[ModeTransferData]
    sim: Optional[SimulationResult]
    absent: dict


def _mode_transfer_data(net: NetworkModel, sigma: float) -> List[ModeTransferData]:
    osc, k_pos = net.osc, net.k - 1
    others = [bm for m, bm in enumerate(osc.b) if m != k_pos]
    out = []
    for j, v in enumerate(net.coupling.eigenvalues, start=1):
        coeffs = expand_from_linear_factors([osc.b[k_pos] + float(v)] + others)
        coeffs[-1] += sigma
        out.append(ModeTransferData(mode=j, v=float(v), denominator_coeffs=tuple(coeffs)))
    return out


def analyze(net: NetworkModel, with_sim: Optional[SimConfig] = None) -> AnalysisReport:
    """Run the full analysis pipeline; sections that fail record a reason."""
    absent = {}
    eq = solve_equilibrium(net.osc.p, net.osc.B)
    osc_verdict = oscillation_condition(net.osc)

    sync_verdict = None
    if net.N < 2:
        absent["sync"] = "single oscillator"
    elif not net.coupling.is_connected():
        absent["sync"] = "v2 = 0 (coupling not connected)"
    else:
        sync_verdict = sync_condition(net)

    period = None
    try:
        period = estimate_period(net)
    except ValueError as exc:
        absent["period"] = str(exc)

    sim_result = None
    if with_sim is not None:
        _, sim_result = run_simulation(net, with_sim)
    else:
        absent["simulation"] = "not requested"

    return AnalysisReport(
        net=net,
        equilibrium=eq,
        oscillation=osc_verdict,
        sync=sync_verdict,
        period=period,
        modes=_mode_transfer_data(net, eq.sigma),
        sim=sim_result,
        absent=absent,
    )


def mode_instability_map(report: AnalysisReport) -> List[bool]:
    """Per-mode instability: mode j is unstable iff sigma > kappa_j.

    kappa_j is the negative-real-axis crossing magnitude of the mode-j
    loop, whose coupled-species rate is offset by upsilon_j; mode 1
    reproduces the oscillation verdict.
    """
    net = report.net
    osc, k_pos = net.osc, net.k - 1
    sigma = report.equilibrium.sigma
    out = []
    for v in net.coupling.eigenvalues:
        mu_j = phase_crossing_frequency(osc.b, offset_index=k_pos, offset=float(v))
        if mu_j is None:
            raise ValueError("mode instability map needs M >= 3")
        rates = list(osc.b)
        rates[k_pos] += float(v)
        kappa_j = np.prod([np.hypot(mu_j, r) for r in rates])
        out.append(bool(sigma > kappa_j))
    return out


def _round_trip(value):
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    return value


def _finite_or_none(value):
    """JSON has no Infinity; absent-by-divergence fields serialize as null."""
    if value is None or not np.isfinite(value):
        return None
    return float(value)


def report_to_dict(report: AnalysisReport) -> dict:
    """Stable JSON-shaped view of the report (schema documented in README)."""
    net = report.net
    osc = net.osc
    doc = {
        "schema_version": SCHEMA_VERSION,
        "model": {
            "M": osc.M,
            "b": list(osc.b),
            "p": osc.p,
            "time_scale": osc.time_scale,
        },
        "network": {
            "N": net.N,
            "k_index": net.k,
            "v2": _round_trip(net.coupling.v2),
            "eigenvalues": [float(v) for v in net.coupling.eigenvalues],
        },
        "equilibrium": {
            "x0": report.equilibrium.x0,
            "B": report.equilibrium.B,
            "sigma": report.equilibrium.sigma,
        },
        "oscillation": {
            "R": report.oscillation.R,
            "kappa0": report.oscillation.kappa0,
            "mu": report.oscillation.mu,
            "oscillatory": report.oscillation.oscillatory,
            "reason": report.oscillation.reason,
        },
        "absent_reasons": dict(report.absent),
    }
    if report.sync is not None:
        doc["sync"] = {
            "z0": report.sync.z0,
            "mu2": _finite_or_none(report.sync.mu2),
            "kappa2": _finite_or_none(report.sync.kappa2),
            "threshold": report.sync.threshold,
            "necessary_condition_satisfied": report.sync.satisfied,
            "v2": report.sync.v2,
            "required_v2": report.sync.required_v2,
        }
    else:
        doc["sync"] = None
    if report.period is not None:
        doc["period"] = {
            "mu": report.period.mu,
            "dimensionless": report.period.period_dimensionless,
            "dimensional": report.period.period_dimensional,
            "xi": report.period.xi,
            "eta": report.period.eta,
            "g0_marginal": report.period.g0_marginal,
            "g1_marginal": report.period.g1_marginal,
        }
    else:
        doc["period"] = None
    doc["modes"] = [
        {"mode": m.mode, "v": m.v, "denominator_coeffs": list(m.denominator_coeffs)}
        for m in report.modes
    ]
    if report.sim is not None:
        doc["simulation"] = {
            "oscillatory": report.sim.oscillatory,
            "measured_period": report.sim.measured_period,
            "period_stderr": report.sim.period_stderr,
            "sync_error": report.sim.sync_error,
            "synchronized": report.sim.synchronized,
            "amplitude_mean": list(report.sim.amplitude_mean),
            "amplitude_ptp": list(report.sim.amplitude_ptp),
        }
    else:
        doc["simulation"] = None
    return doc


def report_to_json(report: AnalysisReport, indent: int = 2) -> str:
    return json.dumps(report_to_dict(report), indent=indent, sort_keys=False)
