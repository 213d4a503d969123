"""Aberth-Ehrlich simultaneous root finding for small monic polynomials.

Coefficients are in descending powers with coeffs[0] == 1.  Degrees here
stay small (loop lengths of a few dozen), so simultaneous iteration with
a circle of perturbed initial guesses is robust and plenty fast.
"""

import numpy as np

__all__ = ["polyval", "expand_from_linear_factors", "aberth_roots"]


def polyval(coeffs, s):
    """Horner evaluation of a polynomial in descending-power form."""
    acc = 0.0 + 0.0j if np.iscomplexobj(np.asarray(coeffs)) or np.iscomplexobj(s) else 0.0
    for c in np.asarray(coeffs).ravel():
        acc = acc * s + c
    return acc


def expand_from_linear_factors(constants):
    """Coefficients (descending) of prod_m (s + c_m) for real constants c_m."""
    coeffs = np.array([1.0])
    for c in constants:
        coeffs = np.convolve(coeffs, np.array([1.0, float(c)]))
    return coeffs


def _eval_with_derivative(coeffs, z):
    p = coeffs[0] + 0.0j
    dp = 0.0 + 0.0j
    for c in coeffs[1:]:
        dp = dp * z + p
        p = p * z + c
    return p, dp


def aberth_roots(coeffs, tol: float = 1e-12, max_iter: int = 200) -> np.ndarray:
    """All roots of a monic polynomial by Aberth-Ehrlich iteration.

    Initial guesses sit on a circle of radius 1 + max|coeff| with a fixed
    angular offset that breaks coefficient symmetries.  Convergence is
    declared when every correction is below tol relative to its root.
    """
    c = np.asarray(coeffs, dtype=complex).ravel()
    if c.size < 2:
        return np.empty(0, dtype=complex)
    if abs(c[0] - 1.0) > 1e-9:
        c = c / c[0]
    n = c.size - 1
    radius = 1.0 + float(np.max(np.abs(c)))
    angles = 2.0 * np.pi * (np.arange(n) + 0.25) / n + 0.41
    z = radius * np.exp(1j * angles)
    for _ in range(max_iter):
        moved = 0.0
        for i in range(n):
            p, dp = _eval_with_derivative(c, z[i])
            if p == 0.0:
                continue
            if dp == 0.0:
                z[i] += tol * (1.0 + abs(z[i]))
                moved = np.inf
                continue
            w = p / dp
            rep = np.sum(1.0 / (z[i] - np.delete(z, i)))
            denom = 1.0 - w * rep
            step = w if denom == 0.0 else w / denom
            z[i] -= step
            moved = max(moved, abs(step) / (1.0 + abs(z[i])))
        if moved < tol:
            break
    return z
