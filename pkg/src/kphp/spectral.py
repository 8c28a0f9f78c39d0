"""Complex spectral-plane primitives.

Dispersion relation, exponential weight kernels, the boundary forcing
kernel, and quadrant bookkeeping for the sectionally defined eigenfunction
branches.  Everything here is a pure function of its arguments; all the
identities these functions satisfy are exercised numerically in the test
suite rather than derived symbolically.

Conventions: the spectral variable is k = k_R + i k_I with real k_R, k_I;
l and lam are real auxiliary wavenumbers.  Branch names "mu1+", "mu1-",
"mu2-", "mu2+" refer to the closed quadrants II, III, IV, I of the complex
k-plane in that order.
"""

from dataclasses import dataclass

import numpy as np

BRANCH_QUADRANT = {"mu2+": "I", "mu1+": "II", "mu1-": "III", "mu2-": "IV"}
QUADRANT_BRANCH = {v: k for k, v in BRANCH_QUADRANT.items()}


@dataclass(frozen=True)
class SpectralPoint:
    """A point k = k_R + i k_I of the complex spectral plane."""

    k_R: float
    k_I: float

    @property
    def k(self):
        return complex(self.k_R, self.k_I)

    def reflected(self):
        """k_R -> -k_R (the 'tilde' reflection)."""
        return SpectralPoint(-self.k_R, self.k_I)

    def quadrant(self):
        return quadrant(self)


@dataclass(frozen=True)
class RegionTag:
    """Closed-region tag: quadrant name plus the admissible branches."""

    name: str
    branches: tuple


def quadrant(pt):
    """Region tag for a spectral point, with axes as closed regions.

    Interior sign patterns map to a single branch; points on an axis list
    both adjacent branches, the origin lists all four.
    """
    kr, ki = pt.k_R, pt.k_I
    if kr == 0.0 and ki == 0.0:
        return RegionTag("origin", ("mu1+", "mu1-", "mu2-", "mu2+"))
    if kr == 0.0:
        if ki > 0:
            return RegionTag("axis-I", ("mu1+", "mu2+"))
        return RegionTag("axis-I", ("mu1-", "mu2-"))
    if ki == 0.0:
        if kr < 0:
            return RegionTag("axis-R", ("mu1+", "mu1-"))
        return RegionTag("axis-R", ("mu2+", "mu2-"))
    if kr < 0 and ki > 0:
        return RegionTag("II", ("mu1+",))
    if kr < 0 and ki < 0:
        return RegionTag("III", ("mu1-",))
    if kr > 0 and ki < 0:
        return RegionTag("IV", ("mu2-",))
    return RegionTag("I", ("mu2+",))


def dispersion(k, l):
    """omega(k, l) = -4 i l (l^2 + 3 k l + 3 k^2).

    Total function of a complex k and a real (or complex, when analytic
    continuation is wanted) l.  Re omega = 12 l k_I (l + 2 k_R) for real l.
    """
    k = np.asarray(k, dtype=np.complex128)
    l = np.asarray(l, dtype=np.complex128)
    return -4j * l * (l * l + 3.0 * k * l + 3.0 * k * k)


def dispersion_shifted(k):
    """omega(k, -2 k_R) = 8 i k_R (k_R^2 - 3 k_I^2 ...): purely imaginary
    for real k_I.  Accepts complex k_I through a complex k."""
    kr = np.real(np.asarray(k, dtype=np.complex128))
    return dispersion(k, -2.0 * kr)


def linear_phase(k1, k2):
    """Omega(k1, k2) = k1^3 + 3 k2^2 / k1 (k1 != 0)."""
    k1 = np.asarray(k1)
    if np.any(k1 == 0):
        raise ZeroDivisionError("linear phase undefined at k1 = 0")
    return k1 ** 3 + 3.0 * np.asarray(k2) ** 2 / k1


def weight_e_general(x, y, t, k, lam):
    """e_{Xt}(x,y,t,k,lam) = exp(-i(lam+2k)x + i lam(lam+2k) y
    + omega(k,lam) t - 8 i k^3 t)."""
    k = np.asarray(k, dtype=np.complex128)
    lam = np.asarray(lam, dtype=np.complex128)
    ex = -1j * (lam + 2.0 * k) * x + 1j * lam * (lam + 2.0 * k) * y
    ex = ex + (dispersion(k, lam) - 8j * k ** 3) * t
    return np.exp(ex)


def weight_e1(x, y, t, k_R, k_I):
    """exp(-2 i k_R x + 4 k_R k_I y - omega(k, -2 k_R) t).

    Modulus equals exp(4 k_R k_I y) for real arguments.  k_I may be given
    complex to follow the analytic continuations used by the inverse
    problem.
    """
    k = k_R + 1j * np.asarray(k_I, dtype=np.complex128)
    ex = -2j * np.asarray(k_R, dtype=np.complex128) * x + 4.0 * k_R * np.asarray(k_I, dtype=np.complex128) * y
    return np.exp(ex - dispersion(k, -2.0 * np.asarray(k_R)) * t)


def weight_e2(x, y, t, k_R, lam):
    """e_{2Xt}: the general weight at real k = k_R."""
    return weight_e_general(x, y, t, np.asarray(k_R, dtype=np.complex128), lam)


def weight_E(x, y, t, k_R, l):
    """E_{Xt}(x,y,t,k_R,l) = exp(i l x + i l (l + 2 k_R) y - omega(k_R, l) t).

    Satisfies E(l) = e2(-2 k_R - l) identically.
    """
    l = np.asarray(l, dtype=np.complex128)
    ex = 1j * l * x + 1j * l * (l + 2.0 * k_R) * y - dispersion(k_R, l) * t
    return np.exp(ex)


def forcing_parts(g_x, g, h_antideriv):
    """Decompose H = A - (l + k) B with A = 3(g_x - i dx^{-1}h), B = 6 i g.

    The affine-in-(l+k) split lets one wavenumber transform of (A phi) and
    (B phi) serve every (k, l) pair.
    """
    A = 3.0 * (np.asarray(g_x) - 1j * np.asarray(h_antideriv))
    B = 6j * np.asarray(g)
    return A, B


def boundary_forcing(g_x, g, h_antideriv, k, l):
    """H(x,t,k,l) = 3 [g_x - 2i(l+k) g - i dx^{-1} h] on arrays.

    g_x and dx^{-1}h are supplied precomputed (discrete calculus lives in
    grid.py, never here).
    """
    A, B = forcing_parts(g_x, g, h_antideriv)
    return A - (np.asarray(l) + np.asarray(k)) * B


def boundary_forcing_at(g_x, g, h_antideriv, k, l, ix):
    """Pointwise H at sample index ix of the trace arrays."""
    n = np.shape(g)[0]
    if not (-n <= ix < n):
        raise IndexError(f"trace index {ix} out of range for {n} samples")
    return complex(boundary_forcing(g_x[ix], g[ix], h_antideriv[ix], k, l))
