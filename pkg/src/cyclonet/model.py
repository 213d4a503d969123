"""Domain types for cyclic feedback oscillators and their coupling networks.

A single oscillator is a loop of M reactions in which each product drives
the next and the end product represses the first through a Hill function
f(x) = 1/(1 + x^p).  Oscillators interact by diffusive coupling of one
downstream species, encoded by a symmetric zero-row-sum Laplacian matrix.
"""

import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

__all__ = [
    "DimensionalParams",
    "OscillatorParams",
    "CouplingLaplacian",
    "NetworkModel",
    "nondimensionalize",
    "concentration_scales",
    "build_laplacian",
    "generate_topology",
    "jacobi_eigenvalues",
]

# Algebraic connectivity below this counts as disconnected.
CONNECTIVITY_TOL = 1e-9

_SYMMETRY_TOL = 1e-12


@dataclass(frozen=True)
class DimensionalParams:
    """Raw biochemical rates of a single cyclic feedback loop.

    synthesis_rates: rho_0 .. rho_{M-1}; rho_0 carries concentration/time,
        the rest 1/time.
    degradation_rates: k_1 .. k_M, each 1/time.
    binding_inverse: K_0, the concentration scale of end-product binding.
    hill_p: Hill coefficient of the repression, >= 1.
    """

    synthesis_rates: tuple
    degradation_rates: tuple
    binding_inverse: float
    hill_p: float

    def __post_init__(self):
        object.__setattr__(self, "synthesis_rates", tuple(float(r) for r in self.synthesis_rates))
        object.__setattr__(self, "degradation_rates", tuple(float(k) for k in self.degradation_rates))
        if len(self.synthesis_rates) != len(self.degradation_rates):
            raise ValueError(
                f"need one synthesis rate per reaction: got {len(self.synthesis_rates)} "
                f"synthesis vs {len(self.degradation_rates)} degradation rates"
            )
        if self.M < 2:
            raise ValueError(f"loop length must be >= 2, got M={self.M}")
        if any(r <= 0 for r in self.synthesis_rates):
            raise ValueError("all synthesis rates must be strictly positive")
        if any(k <= 0 for k in self.degradation_rates):
            raise ValueError("all degradation rates must be strictly positive")
        if self.binding_inverse <= 0:
            raise ValueError("binding_inverse must be strictly positive")
        if self.hill_p < 1:
            raise ValueError(f"hill_p must be >= 1, got {self.hill_p}")

    @property
    def M(self):
        return len(self.degradation_rates)


@dataclass(frozen=True)
class OscillatorParams:
    """Dimensionless description of one oscillator.

    b: dimensionless degradation rates b_1 .. b_M (all positive).
    p: Hill coefficient, >= 1.
    time_scale: the rate (1/time) relating dimensionless time to physical
        time; 1.0 when the parameters were specified dimensionless.
    """

    b: tuple
    p: float
    time_scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "b", tuple(float(x) for x in self.b))
        if len(self.b) < 2:
            raise ValueError(f"loop length must be >= 2, got M={len(self.b)}")
        if any(not math.isfinite(x) or x <= 0 for x in self.b):
            raise ValueError("all entries of b must be finite and strictly positive")
        if self.p < 1:
            raise ValueError(f"Hill coefficient must be >= 1, got p={self.p}")
        if not (math.isfinite(self.time_scale) and self.time_scale > 0):
            raise ValueError("time_scale must be finite and strictly positive")
        if not (math.isfinite(self.B) and self.B > 0):
            raise ValueError("product of b entries must be finite and positive")

    @property
    def M(self):
        return len(self.b)

    @property
    def B(self):
        """Loop gain denominator: the product of all b_m."""
        return math.prod(self.b)


def nondimensionalize(d: DimensionalParams) -> OscillatorParams:
    """Map raw biochemical rates to the dimensionless oscillator form.

    The time scale is sigma_t = ((prod rho_i) / K_0)^(1/M) and the
    dimensionless degradation rates are b_m = k_m / sigma_t.
    """
    M = d.M
    log_scale = (sum(math.log(r) for r in d.synthesis_rates) - math.log(d.binding_inverse)) / M
    ts = math.exp(log_scale)
    b = tuple(k / ts for k in d.degradation_rates)
    return OscillatorParams(b=b, p=d.hill_p, time_scale=ts)


def concentration_scales(d: DimensionalParams) -> np.ndarray:
    """Per-species factors nu_1 .. nu_M mapping concentrations to states.

    x_m = nu_m * [P_m], with nu_M = 1/K_0 and nu_{m-1} = rho_{m-1} nu_m / sigma_t.
    """
    ts = nondimensionalize(d).time_scale
    nu = np.empty(d.M)
    nu[-1] = 1.0 / d.binding_inverse
    for m in range(d.M - 1, 0, -1):
        nu[m - 1] = d.synthesis_rates[m] * nu[m] / ts
    return nu


def jacobi_eigenvalues(sym: np.ndarray, tol: float = 1e-12, max_sweeps: int = 100) -> np.ndarray:
    """Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.

    Sweeps zero out off-diagonal entries until the off-diagonal Frobenius
    norm falls below tol times the matrix norm.
    """
    a = np.array(sym, dtype=float)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError(f"matrix must be square, got shape {a.shape}")
    if n == 1:
        return a.diagonal().copy()
    norm = np.linalg.norm(a)
    if norm == 0.0:
        return np.zeros(n)
    for _ in range(max_sweeps):
        off = math.sqrt(max(0.0, np.linalg.norm(a) ** 2 - np.linalg.norm(a.diagonal()) ** 2))
        if off <= tol * norm:
            break
        for q in range(1, n):
            for p_ in range(q):
                apq = a[p_, q]
                if abs(apq) <= 0.25 * tol * norm / (n * n):
                    continue
                theta = (a[q, q] - a[p_, p_]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                rot_p = c * a[p_, :] - s * a[q, :]
                rot_q = s * a[p_, :] + c * a[q, :]
                a[p_, :], a[q, :] = rot_p, rot_q
                rot_p = c * a[:, p_] - s * a[:, q]
                rot_q = s * a[:, p_] + c * a[:, q]
                a[:, p_], a[:, q] = rot_p, rot_q
    vals = np.sort(a.diagonal())
    return vals


class CouplingLaplacian:
    """Symmetric zero-row-sum coupling matrix with its spectrum.

    Built from a symmetric nonnegative weight matrix with zero diagonal;
    the Laplacian has row sums that cancel by construction.  Eigenvalues
    are computed on first use and cached.
    """

    def __init__(self, weights):
        w = np.array(weights, dtype=float)
        n = w.shape[0]
        if w.ndim != 2 or w.shape != (n, n):
            raise ValueError(f"weights must be a square matrix, got shape {w.shape}")
        if n < 1:
            raise ValueError("need at least one node")
        if np.any(~np.isfinite(w)):
            raise ValueError("weights must be finite")
        asym = np.max(np.abs(w - w.T)) if n > 1 else 0.0
        if asym > _SYMMETRY_TOL:
            raise ValueError(
                f"weights must be symmetric to {_SYMMETRY_TOL:g}; max asymmetry {asym:.3e}"
            )
        if np.any(w < 0):
            raise ValueError("weights must be nonnegative")
        if np.any(np.abs(np.diag(w)) > 0):
            raise ValueError("weight matrix must have zero diagonal (no self-coupling)")
        w = 0.5 * (w + w.T)
        lap = np.diag(w.sum(axis=1)) - w
        w.setflags(write=False)
        lap.setflags(write=False)
        self.weights = w
        self.matrix = lap

    @property
    def N(self):
        return self.weights.shape[0]

    @cached_property
    def eigenvalues(self) -> np.ndarray:
        """Laplacian spectrum upsilon_1 <= ... <= upsilon_N (ascending)."""
        vals = jacobi_eigenvalues(self.matrix)
        vals.setflags(write=False)
        return vals

    @property
    def v2(self):
        """Algebraic connectivity upsilon_2, or None for a single node."""
        if self.N == 1:
            return None
        return float(self.eigenvalues[1])

    def is_connected(self, tol: float = CONNECTIVITY_TOL) -> bool:
        """Connectivity read off the spectrum: upsilon_2 > tol."""
        if self.N == 1:
            return True
        return self.v2 > tol

    def connected_by_traversal(self) -> bool:
        """Connectivity by breadth-first search on the weight graph."""
        n = self.N
        seen = np.zeros(n, dtype=bool)
        queue = deque([0])
        seen[0] = True
        while queue:
            i = queue.popleft()
            for j in np.nonzero(self.weights[i] > 0)[0]:
                if not seen[j]:
                    seen[j] = True
                    queue.append(j)
        return bool(seen.all())

    def __repr__(self):
        return f"CouplingLaplacian(N={self.N}, v2={self.v2})"


def build_laplacian(weights) -> CouplingLaplacian:
    """Validate a weight matrix and wrap it as a CouplingLaplacian."""
    return CouplingLaplacian(weights)


def generate_topology(kind, n, *, weight=1.0, weight_range=(0.0, 20.0), seed=None, dims=None):
    """Produce an N x N symmetric nonnegative weight matrix.

    kind: one of complete, ring, path, grid, random.
    weight: edge weight for the deterministic topologies.
    weight_range: uniform sampling range for kind="random".
    seed: RNG seed for kind="random".
    dims: (rows, cols) for kind="grid"; must multiply to n.
    """
    if n < 1:
        raise ValueError(f"need at least one node, got N={n}")
    if kind != "random" and weight < 0:
        raise ValueError("edge weight must be nonnegative")
    w = np.zeros((n, n))
    if kind == "complete":
        w[:] = weight
        np.fill_diagonal(w, 0.0)
    elif kind == "ring":
        for i in range(n):
            j = (i + 1) % n
            if i != j:
                w[i, j] = w[j, i] = weight
    elif kind == "path":
        for i in range(n - 1):
            w[i, i + 1] = w[i + 1, i] = weight
    elif kind == "grid":
        if dims is None:
            raise ValueError("grid topology needs dims=(rows, cols)")
        rows, cols = dims
        if rows * cols != n:
            raise ValueError(f"grid dims {rows}x{cols} do not multiply to N={n}")
        for r in range(rows):
            for c in range(cols):
                i = r * cols + c
                if c + 1 < cols:
                    w[i, i + 1] = w[i + 1, i] = weight
                if r + 1 < rows:
                    w[i, i + cols] = w[i + cols, i] = weight
    elif kind == "random":
        lo, hi = weight_range
        if not (0 <= lo <= hi):
            raise ValueError(f"weight_range must satisfy 0 <= lo <= hi, got {weight_range}")
        rng = np.random.default_rng(seed)
        iu = np.triu_indices(n, 1)
        w[iu] = rng.uniform(lo, hi, size=len(iu[0]))
        w = w + w.T
    else:
        raise ValueError(f"unknown topology kind {kind!r}; expected complete|ring|path|grid|random")
    return w


@dataclass(frozen=True)
class NetworkModel:
    """N oscillators diffusively coupled through species k (1-based, 2 <= k <= M)."""

    osc: OscillatorParams
    coupling: CouplingLaplacian
    k: int

    def __post_init__(self):
        if not (2 <= self.k <= self.osc.M):
            raise ValueError(
                f"coupled species index must satisfy 2 <= k <= M={self.osc.M}, got k={self.k}"
            )

    @property
    def N(self):
        return self.coupling.N
