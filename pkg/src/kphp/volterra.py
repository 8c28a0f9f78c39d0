"""Fixed-point machinery for the Volterra-type eigenfunction equations.

The direct problem couples the volume eigenfunction mu(x, y, t) to its
boundary restriction phi(x, t) = mu(x, 0, t) through wavenumber-resolved
kernels.  Discretely the iterate is the pair (mu on the coarse t grid,
phi on a fine tau grid); every kernel application is a chain of

    wavenumber transform -> one-sided oscillatory cumulative -> synthesis

with each cumulative running a recurrence whose weights stay bounded by
one on the term's validity range.  The kernel operators are linear, so a
Neumann iteration converges whenever the data is inside the contraction
regime; divergence is detected and reported, never silently accepted.

Branch labels follow the closed quadrants: mu1+ (k_R <= 0, k_I >= 0),
mu1- (k_R <= 0, k_I <= 0), mu2- (k_R >= 0, k_I <= 0), mu2+ (k_R >= 0,
k_I >= 0).  Every solve is parameterized by (a, kappa): a is the real
split parameter entering the wavenumber-range decompositions (normally
Re k) and kappa the value entering the kernels (normally k itself).  The
analytic continuations used by the inverse problem reuse the same
machinery with real kappa.
"""

from dataclasses import dataclass, field as dfield

import numpy as np

from . import accel
from .grid import GridSpec, trapezoid_weights, y_weights
from .spectral import dispersion, weight_e2


class DivergenceError(RuntimeError):
    """Neumann iteration diverged (data outside the contraction regime)."""

    def __init__(self, history):
        self.history = list(history)
        super().__init__(f"fixed-point iteration diverged; residuals {self.history[-3:]}")


class KernelLinearityError(ValueError):
    """Kernel applicator failed the linearity probe."""


@dataclass
class ConvergenceReport:
    iterations: int
    residuals: list

    @property
    def final_residual(self):
        return self.residuals[-1] if self.residuals else 0.0


@dataclass
class VolterraProblem:
    """forcing + linear kernel applicator working on tuples of arrays."""

    forcing: tuple
    apply_kernel: callable
    tol: float = 1e-11
    max_iter: int = 80


def _norm(state):
    return max(float(np.max(np.abs(a))) if a.size else 0.0 for a in state)


def check_kernel_linearity(problem, tol=1e-10, seed=0):
    """K(a f + b g) = a K f + b K g on two fixed pseudo-random inputs."""
    rng = np.random.default_rng(seed)
    f = tuple(rng.standard_normal(a.shape) + 1j * rng.standard_normal(a.shape)
              for a in problem.forcing)
    g = tuple(rng.standard_normal(a.shape) + 1j * rng.standard_normal(a.shape)
              for a in problem.forcing)
    a, b = 0.37, -1.21
    lhs = problem.apply_kernel(tuple(a * x + b * y for x, y in zip(f, g)))
    rhs = tuple(a * x + b * y for x, y in
                zip(problem.apply_kernel(f), problem.apply_kernel(g)))
    err = _norm(tuple(x - y for x, y in zip(lhs, rhs)))
    scale = max(_norm(lhs), 1e-30)
    if err > tol * scale:
        raise KernelLinearityError(f"kernel linearity violated: {err:.2e} vs scale {scale:.2e}")
    return err / scale


def solve_fixed_point(problem, verify_linearity=False):
    """Neumann iteration f_{n+1} = forcing + K f_n with a residual history.

    Divergence (three consecutive growing residuals above the starting
    level, or max_iter exhaustion) raises DivergenceError carrying the
    history.
    """
    if verify_linearity:
        check_kernel_linearity(problem)
    state = tuple(np.array(a, dtype=np.complex128) for a in problem.forcing)
    history = []
    grow = 0
    for it in range(problem.max_iter):
        image = problem.apply_kernel(state)
        new = tuple(f + ki for f, ki in zip(problem.forcing, image))
        res = _norm(tuple(n - s for n, s in zip(new, state)))
        history.append(res)
        state = new
        scale = max(_norm(state), 1e-30)
        if res <= problem.tol * scale:
            return state, ConvergenceReport(it + 1, history)
        if len(history) > 3 and res > history[-2] > history[-3] and res > history[0]:
            grow += 1
            if grow >= 2:
                raise DivergenceError(history)
        else:
            grow = 0
    raise DivergenceError(history)


# ----------------------------------------------------------------------
# scenario data container
# ----------------------------------------------------------------------

@dataclass
class DirectData:
    """Sampled data for the direct problem at one amplitude.

    q lives on the (x, y, t-coarse) grid; the boundary forcing combinations
    A = 3 (g_x - i dx^{-1} h) and B = 6 i g live on the fine tau grid, so
    H(.,.,k,l) = A - (l + k) B.
    """

    grid: GridSpec
    taus: np.ndarray
    q: np.ndarray
    A: np.ndarray
    B: np.ndarray
    q0: np.ndarray = dfield(default=None)

    def __post_init__(self):
        if self.q0 is None:
            self.q0 = self.q[:, :, 0]


# ----------------------------------------------------------------------
# terms of the branch equations
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class QTerm:
    coef: complex
    lo: float
    hi: float
    low_eta: bool     # eta in (0, y) versus (y, Ly)


@dataclass(frozen=True)
class HTerm:
    coef: complex
    lo: float
    hi: float
    past: bool        # tau in (0, t) versus (t, T)


def branch_terms(branch, a, L):
    """Term lists of the four quadrant equations (splits at -2a)."""
    s0 = -2.0 * a
    if branch == "mu1+":
        return [QTerm(-1j, 0.0, L, True), HTerm(-1.0, 0.0, s0, False),
                HTerm(1.0, s0, L, True), QTerm(1j, -L, 0.0, False)]
    if branch == "mu1-":
        return [QTerm(1j, 0.0, L, False), HTerm(-1.0, -L, 0.0, False),
                QTerm(-1j, -L, 0.0, True)]
    if branch == "mu2-":
        return [QTerm(1j, 0.0, L, False), HTerm(-1.0, -L, 0.0, False),
                HTerm(1.0, s0, 0.0, True), QTerm(-1j, -L, 0.0, True)]
    if branch == "mu2+":
        return [QTerm(-1j, 0.0, L, True), HTerm(1.0, 0.0, L, True),
                QTerm(1j, -L, 0.0, False)]
    raise ValueError(f"unknown branch {branch}")


def breve_terms(branch, a, lam, L):
    """Term lists of the shifted-argument ('breve') equations used by the
    real-axis jump assembly; splits at s1 = -2 k_R - lambda."""
    s1 = -2.0 * a - lam
    if branch == "mu1+":
        return [QTerm(-1j, s1, L, True), HTerm(-1.0, s1, 0.0, False),
                HTerm(1.0, 0.0, L, True), QTerm(1j, -L, s1, False)]
    if branch == "mu2+":
        return [QTerm(-1j, s1, L, True), HTerm(1.0, s1, L, True),
                QTerm(1j, -L, s1, False)]
    raise ValueError("breve equations exist for mu1+ and mu2+")


# ----------------------------------------------------------------------
# the solver
# ----------------------------------------------------------------------

def _oriented(lo, hi, L):
    """Clip an oriented interval into [-L, L]; returns (sign, lo, hi) or None."""
    sgn = 1.0
    if hi < lo:
        lo, hi = hi, lo
        sgn = -1.0
    lo, hi = max(lo, -L), min(hi, L)
    if hi - lo <= 1e-14:
        return None
    return sgn, lo, hi


class BranchSolver:
    """Shared discretization for every branch-type solve on one data set."""

    def __init__(self, data, l_max=6.5, dl=0.05, tol=1e-11, max_iter=80):
        self.data = data
        self.L = l_max
        self.dl = dl
        self.tol = tol
        self.max_iter = max_iter
        g = data.grid
        self.xs, self.ys, self.tc = g.xs, g.ys, g.ts
        self.taus = data.taus
        self.ntf = len(self.taus)
        self.dtau = self.taus[1] - self.taus[0]
        self.wy = y_weights(g)
        # cubic interpolation weights coarse-t -> fine-tau
        ntc = g.nt
        pos = self.taus / g.dt
        j = np.clip(pos.astype(int), 0, ntc - 2)
        js = np.clip(j - 1, 0, ntc - 4)
        self._interp_idx = js
        w = np.empty((self.ntf, 4))
        for aa in range(4):
            num = np.ones(self.ntf)
            for bb in range(4):
                if bb != aa:
                    num *= pos - (js + bb)
            den = np.prod([aa - bb for bb in range(4) if bb != aa])
            w[:, aa] = num / den
        self._interp_w = w

    def _interp_t(self, vals):
        """(..., ntc) -> (..., ntf) 4-point Lagrange in t."""
        js = self._interp_idx
        out = np.zeros(vals.shape[:-1] + (self.ntf,), dtype=vals.dtype)
        for aa in range(4):
            out += self._interp_w[:, aa] * vals[..., js + aa]
        return out

    def _segments(self, splits):
        """Uniform sub-grids between consecutive breakpoints."""
        pts = sorted({-self.L, self.L, 0.0, *(float(s) for s in splits
                                              if -self.L < s < self.L)})
        segs = []
        for lo, hi in zip(pts[:-1], pts[1:]):
            n = max(3, int(np.ceil((hi - lo) / self.dl)) + 1)
            nodes = np.linspace(lo, hi, n)
            segs.append((nodes, trapezoid_weights(nodes)))
        return segs

    def solve(self, branch, k=None, a=None, kappa=None, forcing=None,
              terms=None, verify_linearity=False):
        """Solve one branch equation; returns (mu, phi, report).

        Either pass a complex spectral point ``k`` or the pair (a, kappa)
        for continued evaluations.  ``forcing`` overrides the constant-one
        forcing (the shifted-argument equations force with e2).
        """
        if k is not None:
            a = float(np.real(k)) if a is None else a
            kappa = complex(k)
        if terms is None:
            terms = branch_terms(branch, a, self.L)
        segs = self._segments([-2.0 * a] + ([t.lo for t in terms] + [t.hi for t in terms]))
        lall = np.concatenate([s[0] for s in segs])
        edges = np.cumsum([0] + [len(s[0]) for s in segs])
        E = np.exp(-1j * np.outer(lall, self.xs)) * self.data.grid.dx   # (nl, nx)
        Es = np.exp(1j * np.outer(self.xs, lall))                        # synthesis
        p = lall * (lall + 2.0 * kappa)
        om = dispersion(kappa, lall)
        nyq = 1j * np.outer(lall, self.ys) * (lall + 2.0 * kappa)[:, None]
        # H-term transverse factor e^{i l (l+2k) y}: bounded on valid ranges
        Hy = np.exp(np.minimum(nyq.real, 0.0) + 1j * nyq.imag)

        cover = []
        for t in terms:
            o = _oriented(t.lo, t.hi, self.L)
            if o is None:
                cover.append(None)
                continue
            sgn, lo, hi = o
            idx = []
            for si, (nodes, _) in enumerate(segs):
                if nodes[0] >= lo - 1e-12 and nodes[-1] <= hi + 1e-12:
                    idx.append(si)
            cover.append((sgn, idx))

        g = self.data.grid
        if forcing is None:
            f_mu = np.ones((g.nx, g.ny, g.nt), dtype=np.complex128)
            f_phi = np.ones((g.nx, self.ntf), dtype=np.complex128)
        else:
            f_mu, f_phi = forcing
        wl = np.concatenate([s[1] for s in segs])

        def apply_kernel(state):
            mu, phi = state
            Gq = (E @ ((self.data.q * mu).reshape(g.nx, -1))).reshape(-1, g.ny, g.nt)
            Ahat = E @ (self.data.A * phi)
            Bhat = E @ (self.data.B * phi)
            Hhat = Ahat - (lall + kappa)[:, None] * Bhat
            out_mu = np.zeros_like(f_mu)
            out_phi = np.zeros_like(f_phi)
            for t, cov in zip(terms, cover):
                if cov is None:
                    continue
                sgn, idx = cov
                sl = np.concatenate([np.arange(edges[i], edges[i + 1]) for i in idx])
                c = t.coef * sgn / (2.0 * np.pi)
                if isinstance(t, QTerm):
                    P = -1j * p[sl]
                    G = np.ascontiguousarray(Gq[sl])
                    if t.low_eta:
                        P = np.where(P.real < 0, 1j * P.imag, P)   # clip sign noise
                        I = accel.osc_cum_forward(G, P, g.dy)
                    else:
                        P = np.where(P.real > 0, 1j * P.imag, P)
                        I = accel.osc_cum_backward(G, P, g.dy)
                    V = (wl[sl][:, None, None] * I).reshape(len(sl), -1)
                    out_mu += c * (Es[:, sl] @ V).reshape(g.nx, g.ny, g.nt)
                    if not t.low_eta:
                        phi_part = self._interp_t(I[:, 0, :])
                        out_phi += c * (Es[:, sl] @ (wl[sl][:, None] * phi_part))
                else:
                    P = om[sl]
                    a_in = np.ascontiguousarray(Hhat[sl])[:, :, None]
                    if t.past:
                        P = np.where(P.real < 0, 1j * P.imag, P)
                        J = accel.osc_cum_forward(a_in, P, self.dtau)[:, :, 0]
                    else:
                        P = np.where(P.real > 0, 1j * P.imag, P)
                        J = accel.osc_cum_backward(a_in, P, self.dtau)[:, :, 0]
                    ric = np.round(self.tc / self.dtau).astype(int)
                    tmp = Hy[sl][:, :, None] * J[:, None, ric]
                    V = (wl[sl][:, None, None] * tmp).reshape(len(sl), -1)
                    out_mu += c * (Es[:, sl] @ V).reshape(g.nx, g.ny, g.nt)
                    out_phi += c * (Es[:, sl] @ (wl[sl][:, None] * J))
            return out_mu, out_phi

        problem = VolterraProblem((f_mu, f_phi), apply_kernel,
                                  tol=self.tol, max_iter=self.max_iter)
        (mu, phi), rep = solve_fixed_point(problem, verify_linearity=verify_linearity)
        return mu, phi, rep

    def solve_breve(self, branch, kR, lam, **kw):
        """e2-weighted shifted-argument solve; returns (e2 mu_breve, report)."""
        g = self.data.grid
        X, Y, T = np.meshgrid(self.xs, self.ys, self.tc, indexing="ij")
        f_mu = weight_e2(X, Y, T, kR, lam)
        Xf, Tf = np.meshgrid(self.xs, self.taus, indexing="ij")
        f_phi = weight_e2(Xf, 0.0, Tf, kR, lam)
        terms = breve_terms(branch, kR, lam, self.L)
        mu, phi, rep = self.solve(branch, a=kR, kappa=complex(kR), terms=terms,
                                  forcing=(f_mu, f_phi), **kw)
        return mu, phi, rep


def lax_x_residual(mu, q, k, grid):
    """Discrete residual of the first Lax equation,
    mu_y + i mu_xx - 2 k mu_x + i q mu, on interior nodes."""
    dx, dy = grid.dx, grid.dy
    mu_y = (mu[:, 2:, :] - mu[:, :-2, :]) / (2 * dy)
    mu_x = (np.roll(mu, -1, 0) - np.roll(mu, 1, 0)) / (2 * dx)
    mu_xx = (np.roll(mu, -1, 0) - 2 * mu + np.roll(mu, 1, 0)) / dx ** 2
    r = (mu_y + (1j * mu_xx - 2 * k * mu_x + 1j * q * mu)[:, 1:-1, :])
    return r
