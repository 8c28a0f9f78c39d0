"""Explicit half-plane solver for the linearized equation.

Three independently assembled representations of the same solution:

* ``u_undeformed`` — wavenumber inversion with boundary tau-integrals over
  [0, t] on the real transverse axis (the representation one reads off the
  global relation directly);
* ``u_deformed`` — boundary tau-integrals extended to [0, T] with the
  transverse contour moved to the truncated quadrant boundaries (second
  quadrant for k1 > 0, first for k1 < 0) where Jordan decay makes the
  extension free;
* ``u_linear_limit`` — the small-amplitude limit of the nonlinear
  machinery: eight regionwise terms built from the reductions X_j / Psi_j
  of the boundary/initial transforms P and R.

All tau integrals against boundary data are evaluated exactly from the
oracle's modal trace representation (resolvent sums); transverse rays get
adaptive node densities derived from the analytic phase rates, so the
plain trapezoid stays inside the phase budget everywhere.

The x direction is window-periodic, so the longitudinal integrals
collapse onto the box modes (sum weight pi/Lx = the exact inversion for
periodic data); the transverse (y) transforms remain genuine quadrature.
"""

from dataclasses import dataclass

import numpy as np

from . import accel
from .grid import GridSpec, trapezoid_weights
from .spectral import dispersion, linear_phase


class SingularParameterError(ValueError):
    """k1 = 0 requested where the linear phase divides by k1."""


@dataclass
class TraceRow:
    """Modal trace transforms of one longitudinal mode k1:
    int e^{-i k1 x} v(x,tau) dx = sum_m cv_m e^{i om_m tau} (w alike)."""

    k1: float
    om: np.ndarray
    cv: np.ndarray
    cw: np.ndarray
    ky: np.ndarray

    def boundary_jet(self, t):
        """(u^, u_y^, u_yy^) of the solution at y = 0, time t, mode k1."""
        ph = np.exp(1j * self.om * t)
        a0 = np.sum(self.cv * ph)
        a1 = np.sum(self.cw * ph)
        a2 = np.sum(self.cv * (1j * self.ky) ** 2 * ph)
        return a0, a1, a2


def quad_phase_nodes(a, b, smax, budget=np.pi / 4.0, cap=300000):
    """Nodes on [0, smax] whose local phase advance a*ds + 2b*s*ds stays
    below the budget (cumulative phase a s + b s^2 stepped uniformly)."""
    a = max(a, 1e-9)
    b = max(b, 0.0)
    total = a * smax + b * smax * smax
    n = int(min(np.ceil(total / budget), cap)) + 1
    ph = np.linspace(0.0, total, n + 1)
    if b > 0:
        s = (-a + np.sqrt(a * a + 4.0 * b * ph)) / (2.0 * b)
    else:
        s = ph / a
    s[-1] = smax
    return s


def resonant_ray_nodes(a, b, smax, res_pos, res_slope, T, budget=np.pi / 4.0,
                       fine=12.0, extent=45.0):
    """Backbone nodes plus clusters resolving finite-horizon resonances.

    The tau-integrals over [0, T] leave sinc-type peaks of width
    ~ 1/(T * |d delta/d s|) at each data frequency; the backbone follows the
    smooth phase a s + b s^2 while each peak gets ``fine`` nodes per width
    out to ``extent`` phase units.
    """
    base = quad_phase_nodes(a, b, smax, budget)
    extra = []
    for pos, slope in zip(np.atleast_1d(res_pos), np.atleast_1d(res_slope)):
        if not (0.0 < pos < smax) or slope <= 0:
            continue
        dw = np.pi / (fine * T * slope)
        n = int(np.ceil(extent / np.pi * fine))
        loc = pos + dw * np.arange(-n, n + 1)
        extra.append(loc[(loc > 0) & (loc < smax)])
    if extra:
        s = np.unique(np.concatenate([base] + extra))
        keep = np.concatenate([[True], np.diff(s) > 1e-13])
        s = s[keep]
        if s[-1] != smax:
            s = np.append(s, smax)
        return s
    return base


class LinearSolver:
    """Evaluates the three solution representations for one scenario."""

    def __init__(self, orc, grid=None, k1_cut=7.0, k2_max=14.0, dk2=0.06,
                 ray_K=26.0, sig_max=45.0, T_up=None, nx_u0=192, ny_u0=481,
                 x_max=6.0, y_min=0.5, y_max=6.0, t_max=0.35,
                 budget=np.pi / 16.0, sig_budget=np.pi / 24.0, s_cap=90.0):
        self.orc = orc
        self.grid = grid or GridSpec(Lx=orc.Lx, Ly=12.0, T_max=2.0)
        self.Lx = orc.Lx
        self.Ly = self.grid.Ly
        self.T_up = self.grid.T_max if T_up is None else T_up
        self.k2_grid = np.arange(-k2_max, k2_max + dk2 / 2, dk2)
        self.ray_K = ray_K
        self.sig_max = sig_max
        self.budget = budget
        self.sig_budget = sig_budget
        self.s_cap = s_cap
        self.rates = dict(x=x_max, ylo=y_min, yhi=y_max, t=t_max)
        self.rows = [TraceRow(*r) for r in orc.trace_rows(k1_cut)]
        # window samples of the initial datum on a fine transverse grid
        self._xs = -self.Lx + (2 * self.Lx / nx_u0) * np.arange(nx_u0)
        self._yf = np.linspace(0.0, self.Ly, ny_u0)
        u0 = orc.eval_grid(self._xs, self._yf, [0.0])[:, :, 0]
        dx = self._xs[1] - self._xs[0]
        k1s = np.array([r.k1 for r in self.rows])
        E = np.exp(-1j * np.outer(k1s, self._xs)) * dx
        self._u0x = E @ u0                       # (nrows, ny_u0)
        self._wy = trapezoid_weights(self._yf)
        self._def_cache = {}
        self._undef_cache = {}

    # -- data transforms ------------------------------------------------

    def u0hat_row(self, r, k2):
        """Half-plane transform of the initial datum at mode r and
        transverse wavenumbers k2 (may be complex)."""
        k2 = np.asarray(k2, dtype=np.complex128)
        Ey = np.exp(-1j * np.outer(self._yf, k2)) * self._wy[:, None]
        return self._u0x[r] @ Ey

    def R_row(self, r, s):
        """R(nu, -2 nu_R) along the continued line nu = nu_R - s for the
        mode nu_R = -k1/2: equals (i/2pi) u0hat(k1, 4 nu_R s)."""
        nu_R = -self.rows[r].k1 / 2.0
        return (1j / (2.0 * np.pi)) * self.u0hat_row(r, 4.0 * nu_R * s)

    def P_row(self, r, nu, T=None):
        """P(nu, -2 nu_R) for mode row r at (possibly complex) nu values.

        Exact in tau via the modal trace representation; l = -2 nu_R is the
        row's own longitudinal mode.
        """
        row = self.rows[r]
        l = row.k1                     # l = -2 nu_R = k1
        nu = np.asarray(nu, dtype=np.complex128)
        T = self.T_up if T is None else T
        om = dispersion(nu, l)         # (n_nu,)
        z = om[None, :] + 1j * row.om[:, None]          # (nm, n_nu)
        ph = accel.expm1_div(z, T)
        fv = -3j * (l + 2.0 * nu)
        fw = -3.0 / l
        Sv = row.cv @ ph
        Sw = row.cw @ ph
        return (fv * Sv + fw * Sw) / (2.0 * np.pi)

    # -- shared first (initial-datum) term -------------------------------

    def _u0_nodes(self, k1):
        """Phase-resolved k2 nodes for the (undeformed) initial-datum term:
        e^{i Omega t} u0hat oscillates at rate y + 6|k2| t / |k1|."""
        a = self.rates["yhi"] + 1e-3
        b = 3.0 * self.rates["t"] / abs(k1)
        half = quad_phase_nodes(a, b, self.k2_grid[-1], self.budget)
        return np.concatenate([-half[::-1], half[1:]])

    def _u0_term(self, px, py, t):
        out = np.zeros(len(px), dtype=np.complex128)
        if "u0" not in self._def_cache:
            tabs = []
            for r, row in enumerate(self.rows):
                k2 = self._u0_nodes(row.k1)
                tabs.append((k2, trapezoid_weights(k2), linear_phase(row.k1, k2),
                             self.u0hat_row(r, k2)))
            self._def_cache["u0"] = tabs
        for row, (k2, w2, Om, uh) in zip(self.rows, self._def_cache["u0"]):
            f = w2 * np.exp(1j * Om * t) * uh
            ph = np.exp(1j * np.outer(py, k2))
            out += np.exp(1j * row.k1 * px) * (ph @ f)
        return out / (2.0 * self.Lx * 2.0 * np.pi)

    # -- undeformed representation ---------------------------------------

    def _undef_tables(self, t):
        if t not in self._undef_cache:
            tabs = []
            for row in self.rows:
                Om = linear_phase(row.k1, self.k2_grid).astype(np.complex128)
                Sv = accel.resolvent_sum(row.cv, row.om.astype(np.complex128), Om, t)
                Sw = accel.resolvent_sum(row.cw, row.om.astype(np.complex128), Om, t)
                tabs.append(3.0 * (-self.k2_grid * Sv + 1j * Sw) / row.k1)
            self._undef_cache[t] = tabs
        return self._undef_cache[t]

    def u_undeformed(self, px, py, t):
        """Boundary tau-integrals over [0, t], transverse contour on the
        real axis; the initial and boundary transforms are summed inside
        the inversion so their large-k2 oscillations cancel, and the slow
        1/k2 boundary-jump tails are subtracted (their inversion is the
        closed-form causal-exponential jet added back at the end)."""
        px, py = np.asarray(px, float), np.asarray(py, float)
        tabs = self._undef_tables(float(t))
        out = np.zeros(len(px), dtype=np.complex128)
        w2 = trapezoid_weights(self.k2_grid)
        c = 1.0
        ikc = 1j * self.k2_grid + c
        for r, row in enumerate(self.rows):
            Om = linear_phase(row.k1, self.k2_grid)
            a0, a1, a2 = row.boundary_jet(t)
            b1 = a0
            b2 = a1 + c * a0
            b3 = a2 + 2.0 * c * b2 - c * c * b1
            jump = b1 / ikc + b2 / ikc ** 2 + b3 / ikc ** 3
            f = w2 * (np.exp(1j * Om * t) * (self.u0hat_row(r, self.k2_grid) + tabs[r]) - jump)
            ph = np.exp(1j * np.outer(py, self.k2_grid))
            val = (ph @ f) / (2.0 * np.pi)
            val += np.exp(-c * py) * (b1 + b2 * py + 0.5 * b3 * py ** 2)
            out += np.exp(1j * row.k1 * px) * val
        return (out / (2.0 * self.Lx)).real

    # -- deformed representation ------------------------------------------

    def _ray_nodes(self, k1, om_m, smax):
        """Real-ray nodes: quadratic-phase backbone plus clusters resolving
        the finite-horizon resonance peaks at |k2| = sqrt((om_m - k1^3) k1 / 3)
        (width ~ k1 / (6 k2 T), far below the backbone spacing)."""
        T = self.T_up
        a_lin = self.rates["yhi"] + 1e-3
        b_quad = 3.0 * T / abs(k1)
        res2 = (om_m - k1 ** 3) * k1 / 3.0
        kres = np.unique(np.round(np.sqrt(res2[res2 > 1e-12]), 10))
        slopes = 6.0 * kres / abs(k1)
        return resonant_ray_nodes(a_lin, b_quad, smax, kres, slopes, T, self.budget)

    def _contour_row(self, k1, om_m):
        """Quadrant-boundary nodes/weights in the transverse plane for one
        mode: second quadrant for k1 > 0, first for k1 < 0, positively
        oriented, rays truncated at ray_K (real) and sig_max (imaginary),
        node density following the analytic phase rates."""
        T = self.T_up
        a_lin = self.rates["yhi"] + 1e-3
        b_quad = 3.0 * T / abs(k1)
        rho = self._ray_nodes(k1, om_m, self.ray_K)
        sig = quad_phase_nodes(a_lin, b_quad, self.sig_max, self.sig_budget)
        if k1 > 0:
            nodes = np.concatenate([-rho, 1j * sig])
            weights = np.concatenate([trapezoid_weights(rho), 1j * trapezoid_weights(sig)])
        else:
            nodes = np.concatenate([rho, 1j * sig])
            weights = np.concatenate([trapezoid_weights(rho), -1j * trapezoid_weights(sig)])
        return nodes, weights

    @staticmethod
    def _resolvent_split(row, Om, T):
        """Sv, Sw split into the tau-endpoint families:
        S = e^{-i Om T} * RB - RA with RA = sum c/(i delta),
        RB = sum c e^{i om T}/(i delta)."""
        z = 1j * (row.om[:, None] - np.atleast_1d(Om)[None, :])
        RAv = np.sum(row.cv[:, None] / z, axis=0)
        RAw = np.sum(row.cw[:, None] / z, axis=0)
        eb = np.exp(1j * row.om * T)
        RBv = np.sum((row.cv * eb)[:, None] / z, axis=0)
        RBw = np.sum((row.cw * eb)[:, None] / z, axis=0)
        return RAv, RAw, RBv, RBw

    def _def_tables(self):
        if "tabs" not in self._def_cache:
            tabs = []
            for row in self.rows:
                nodes, weights = self._contour_row(row.k1, row.om)
                Om = linear_phase(row.k1, nodes)
                Sv = accel.resolvent_sum(row.cv, row.om.astype(np.complex128), Om, self.T_up)
                Sw = accel.resolvent_sum(row.cw, row.om.astype(np.complex128), Om, self.T_up)
                bb = 3.0 * (-nodes * Sv + 1j * Sw) / row.k1
                # endpoint data for the real-ray tail correction
                k2e = -np.sign(row.k1) * self.ray_K
                RAv, RAw, RBv, RBw = self._resolvent_split(row, linear_phase(row.k1, k2e),
                                                           self.T_up)
                gA = -3.0 * (-k2e * RAv[0] + 1j * RAw[0]) / row.k1
                gB = 3.0 * (-k2e * RBv[0] + 1j * RBw[0]) / row.k1
                tail = (k2e, float(linear_phase(row.k1, k2e)), gA, gB)
                tabs.append((nodes, weights, Om, bb, tail))
            self._def_cache["tabs"] = tabs
        return self._def_cache["tabs"]

    def u_deformed(self, px, py, t):
        """Boundary tau-integrals over [0, T_up] on the deformed quadrant
        boundaries, plus the (undeformed) initial-datum term.  The real-ray
        truncation remainder is added as a first-order endpoint
        integration-by-parts estimate per stationary-phase family."""
        px, py = np.asarray(px, float), np.asarray(py, float)
        out = self._u0_term(px, py, float(t))
        T = self.T_up
        for row, (nodes, weights, Om, bb, tail) in zip(self.rows, self._def_tables()):
            f = weights * np.exp(1j * Om * t) * bb
            ph = np.exp(1j * np.outer(py, nodes))
            val = ph @ f
            k2e, Ome, gA, gB = tail
            sgn = -np.sign(row.k1)                       # d k2 / d rho on the ray
            dOm = 6.0 * k2e / row.k1
            phA = sgn * (py + dOm * t)
            phB = sgn * (py + dOm * (t - T))
            val -= gA * np.exp(1j * (k2e * py + Ome * t)) / (1j * phA)
            val -= gB * np.exp(1j * (k2e * py + Ome * (t - T))) / (1j * phB)
            out += np.exp(1j * row.k1 * px) * val / (2.0 * self.Lx * 2.0 * np.pi)
        return out.real

    # -- linear limit of the nonlinear machinery ---------------------------

    def _s_line_nodes(self, nu_R, om_m):
        """Adaptive nodes for the continued spectral lines nu = nu_R - s,
        with clusters at the finite-horizon resonances of P."""
        a = 4.0 * abs(nu_R) * self.rates["yhi"] + 2.0 * self.rates["x"]
        b = 24.0 * abs(nu_R) * self.T_up
        s_R = 3.6 / max(abs(nu_R), 0.05)
        s_P = 26.0 / max(abs(nu_R), 0.05) ** (2.0 / 3.0)
        smax = min(self.s_cap, max(s_R, s_P))
        res2 = (-om_m / (8.0 * nu_R) - nu_R ** 2) / 3.0
        sres = np.unique(np.round(np.sqrt(res2[res2 > 1e-12]), 10))
        slopes = 48.0 * abs(nu_R) * sres
        return resonant_ray_nodes(a, b, smax, sres, slopes, self.T_up, self.budget)

    def _quad_ray_nodes(self, nu_R):
        """Adaptive nodes on the real-nu_I rays of the d-bar quadrants."""
        a = 4.0 * abs(nu_R) * self.rates["ylo"]
        b = 24.0 * abs(nu_R) * self.T_up
        vmax = min(self.s_cap, 48.0 / max(4.0 * abs(nu_R) * self.rates["ylo"], 0.35))
        return quad_phase_nodes(a, b, vmax, self.budget)

    def _e1(self, px, py, t, nu_R, nu_I):
        """e1 weight with nu_I possibly complex (continued lines)."""
        nu = nu_R + 1j * nu_I
        om = dispersion(nu, -2.0 * nu_R)
        ex = (-2j * nu_R * px[:, None] + 4.0 * nu_R * np.outer(py, np.ones_like(nu_I)) * nu_I[None, :]
              - om[None, :] * t)
        return np.exp(ex)

    def _ll_terms(self, px, py, t, kernel=None):
        """The eight regionwise terms; ``kernel`` switches between the
        solution weights (-4/pi) nu_R and the Cauchy-kernel weights
        -(1/pi)/(nu - k) of the bounded-eigenfunction representation."""
        out = np.zeros(len(px), dtype=np.complex128)
        dn = np.pi / self.Lx / 2.0     # d nu_R between rows (= dk1 / 2)
        for r, row in enumerate(self.rows):
            nu_R = -row.k1 / 2.0
            s = self._s_line_nodes(nu_R, row.om)
            sv = np.concatenate([-s[::-1], s[1:]])
            Rv = self.R_row(r, sv)
            wv = trapezoid_weights(sv)
            # P on the full continued line
            Pv = self.P_row(r, nu_R - sv)
            if nu_R <= 0:
                FA = -Rv.copy()                       # T1 (s <= nu_R) + T4 (s >= nu_R)
                FB = np.where(sv >= 0.0, -Pv, 0.0)    # T6: s >= 0
            else:
                FA = Pv + Rv                          # T2 + T5: full line
                FB = np.where(sv <= 0.0, -Pv, 0.0)    # T3: s <= 0
            F_line = FA + FB
            e1 = self._e1(px, py, t, nu_R, 1j * sv)
            if kernel is None:
                wgt = (-4.0 / np.pi) * nu_R
            else:
                wgt = (-1.0 / np.pi) / (nu_R - sv - kernel)
            out += dn * 1j * (e1 * (wv * wgt * F_line)[None, :]).sum(axis=1)

            # d-bar quadrant rays (real nu_I)
            v = self._quad_ray_nodes(nu_R)[1:]
            if nu_R <= 0:
                vi = v                                # T7: nu_I >= 0
            else:
                vi = -v                               # T8: nu_I <= 0
            wv2 = trapezoid_weights(np.concatenate([[0.0], v]))[1:]
            Pq = self.P_row(r, nu_R + 1j * vi)
            e1q = self._e1(px, py, t, nu_R, vi)
            if kernel is None:
                wgtq = (-4.0 / np.pi) * nu_R
            else:
                wgtq = (-1.0 / np.pi) / (nu_R + 1j * vi - kernel)
            out += dn * (e1q * (wv2 * wgtq * Pq)[None, :]).sum(axis=1)
        return out

    def u_linear_limit(self, px, py, t):
        px, py = np.asarray(px, float), np.asarray(py, float)
        return self._ll_terms(px, py, float(t)).real

    def M_at(self, px, py, t, k):
        """First-order eigenfunction coefficient M(x, y, t, k) from the
        (Cauchy-kernel) bounded representation."""
        px, py = np.asarray(px, float), np.asarray(py, float)
        return self._ll_terms(px, py, float(t), kernel=complex(k))


# ----------------------------------------------------------------------
# residual checks on sampled data
# ----------------------------------------------------------------------

def halfplane_transform(samples, xs, ys, k1, k2):
    """int dx int_0^Ly dy e^{-i k1 x - i k2 y} f on window samples (nx, ny)."""
    dx = xs[1] - xs[0]
    ex = np.exp(-1j * k1 * xs) * dx
    wy = trapezoid_weights(ys)
    ey = np.exp(-1j * np.asarray(k2) * ys) * wy
    return ex @ np.asarray(samples) @ ey


def global_relation_residual_linear(u0, ut, v, w, xs, ys, taus, k1, k2, t):
    """LHS - RHS of the linear global relation at (k1, k2), Im k2 <= 0.

    e^{-i Omega t} u^(t) - u0^ - int_0^t e^{-i Omega tau}
        3 [ -(k2/k1) v^(tau) + (i/k1) w^(tau) ] d tau
    evaluated entirely from sampled data by composite quadrature.
    """
    if k1 == 0:
        raise SingularParameterError("global relation needs k1 != 0")
    if np.imag(k2) > 1e-12:
        raise ValueError("validity region is Im k2 <= 0")
    Om = linear_phase(k1, k2)
    lhs = np.exp(-1j * Om * t) * halfplane_transform(ut, xs, ys, k1, k2)
    acc = halfplane_transform(u0, xs, ys, k1, k2)
    dx = xs[1] - xs[0]
    ex = np.exp(-1j * k1 * xs) * dx
    vt = ex @ v
    wt = ex @ w
    integ = np.exp(-1j * Om * taus) * 3.0 * (-(k2 / k1) * vt + 1j * wt / k1)
    acc += np.sum(trapezoid_weights(taus) * integ)
    return lhs - acc


def adjoint_divergence_residual(sampler, k1, k2, x, y, t, d=2e-2):
    """Discrete divergence of the adjoint-pair conservation law on a cell.

    sampler(x, y, t) -> u.  All derivatives by central differences of
    step d; vanishes at O(d^2) for true solutions, and identically (up to
    differencing error) when u is itself an adjoint-family plane wave with
    matched parameters.
    """
    Om = linear_phase(k1, k2)

    def ut_factor(xx, yy, tt):
        return np.exp(-1j * k1 * xx - 1j * k2 * yy - 1j * Om * tt)

    def du(f, xx, yy, tt, axis, order=1):
        h = d
        e = [0.0, 0.0, 0.0]
        e[axis] = 1.0
        if order == 1:
            return (f(xx + e[0] * h, yy + e[1] * h, tt + e[2] * h)
                    - f(xx - e[0] * h, yy - e[1] * h, tt - e[2] * h)) / (2 * h)
        if order == 2:
            return (f(xx + e[0] * h, yy + e[1] * h, tt + e[2] * h) - 2.0 * f(xx, yy, tt)
                    + f(xx - e[0] * h, yy - e[1] * h, tt - e[2] * h)) / h ** 2
        # third derivative, 5-point
        return (f(xx + 2 * e[0] * h, yy + 2 * e[1] * h, tt + 2 * e[2] * h)
                - 2.0 * f(xx + e[0] * h, yy + e[1] * h, tt + e[2] * h)
                + 2.0 * f(xx - e[0] * h, yy - e[1] * h, tt - e[2] * h)
                - f(xx + 2 * -e[0] * h, yy + 2 * -e[1] * h, tt + 2 * -e[2] * h)) / (2 * h ** 3)

    def flux_t(xx, yy, tt):
        return -1j * k1 * ut_factor(xx, yy, tt) * du(sampler, xx, yy, tt, 0)

    def flux_y(xx, yy, tt):
        return 3.0 * ut_factor(xx, yy, tt) * (
            1j * k1 * du(sampler, xx, yy, tt, 1) + 1j * k2 * du(sampler, xx, yy, tt, 0))

    def flux_x(xx, yy, tt):
        return ut_factor(xx, yy, tt) * (
            -1j * k1 * du(sampler, xx, yy, tt, 0, order=3)
            + 1j * k1 ** 3 * du(sampler, xx, yy, tt, 0)
            + k1 ** 2 * du(sampler, xx, yy, tt, 0, order=2)
            - 3j * k2 * du(sampler, xx, yy, tt, 1))

    return (du(flux_t, x, y, t, 2) + du(flux_x, x, y, t, 0) + du(flux_y, x, y, t, 1))
