"""Oscillatory quadrature, contours, and the Pompeiu (d-bar) machinery.

Everything is composite trapezoid; oscillation is handled by resolution,
never by Filon-type rules.  A phase budget (maximum admissible phase
advance per step, default pi/4) turns silent aliasing into a hard error
carrying the sample count that would have been needed.

The singular Cauchy-kernel area integral uses polar coordinates around the
singular point: the Jacobian rho d(rho) cancels the 1/(zeta - z) pole, so
plain trapezoid keeps its order.  On a disk the whole integral is done in
probe-centered polar; on a rectangle grid only the cell containing z gets
the polar treatment.
"""

from dataclasses import dataclass, field as dfield

import numpy as np

from .grid import trapezoid_weights

PHASE_BUDGET_DEFAULT = np.pi / 4.0


class ResolutionError(ValueError):
    """Sampled phase advance exceeded the budget; carries required count."""

    def __init__(self, axis, needed):
        self.axis = axis
        self.needed = needed
        super().__init__(f"phase budget exceeded on axis {axis}; need >= {needed} samples")


class PlacementError(ValueError):
    """Singular point placed degenerately with respect to the grid."""


@dataclass(frozen=True)
class PhaseBudget:
    max_step: float = PHASE_BUDGET_DEFAULT

    def __post_init__(self):
        if not (0 < self.max_step <= np.pi / 4.0 + 1e-15):
            raise ValueError("accepted quadratures require budget <= pi/4")


@dataclass
class Contour:
    """Oriented, truncated, piecewise path: nodes plus d(zeta) weights.

    ``nodes[j]`` and ``weights[j]`` make ``sum f(nodes) * weights`` the
    trapezoid rule for ``int f(zeta) d zeta`` along the path.
    """

    nodes: np.ndarray
    weights: np.ndarray
    Rtrunc: float = np.inf
    closed: bool = False
    pieces: tuple = dfield(default=())

    def __post_init__(self):
        if np.any(np.abs(np.diff(self.nodes)) == 0.0):
            raise ValueError("consecutive contour nodes must be distinct")

    def integrate(self, f):
        return np.sum(f(self.nodes) * self.weights)


def _polyline(points, n):
    """Piecewise-linear contour through ``points`` with ~n nodes total."""
    points = np.asarray(points, dtype=np.complex128)
    lens = np.abs(np.diff(points))
    total = lens.sum()
    nodes, weights = [], []
    for a, b, L in zip(points[:-1], points[1:], lens):
        m = max(2, int(round(n * L / total)))
        ts = np.linspace(0.0, 1.0, m)
        zs = a + (b - a) * ts
        w = trapezoid_weights(ts) * (b - a)
        if nodes:
            # merge the duplicated joint node
            weights[-1][-1] += w[0]
            zs, w = zs[1:], w[1:]
        nodes.append(zs)
        weights.append(w)
    return np.concatenate(nodes), np.concatenate(weights)


def circle(center, radius, n=256):
    th = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
    nodes = center + radius * np.exp(1j * th)
    weights = 1j * radius * np.exp(1j * th) * (2.0 * np.pi / n)
    return Contour(nodes, weights, Rtrunc=radius, closed=True, pieces=("circle",))


def sector_boundary(theta_in, theta_out, Rtrunc, n=400, with_arc=True):
    """Positively oriented boundary of the sector between two rays.

    Runs 0 -> R e^{i theta_out} along the outgoing ray, then the arc to
    theta_in, then back R e^{i theta_in} -> 0.  For theta_out = 0,
    theta_in = pi/2 this is the truncated boundary of the first quadrant.
    """
    ths = np.linspace(0.0, Rtrunc, max(4, n // 2))
    out_nodes = ths[1:] * np.exp(1j * theta_out)
    out_w = trapezoid_weights(ths)[1:] * np.exp(1j * theta_out)
    out_w[0] += 0.5 * (ths[1] - ths[0]) * np.exp(1j * theta_out)  # fold origin weight
    nodes = [out_nodes]
    weights = [out_w]
    if with_arc:
        na = max(8, n // 8)
        arc_th = np.linspace(theta_out, theta_in, na)
        arc_nodes = Rtrunc * np.exp(1j * arc_th)
        arc_w = trapezoid_weights(arc_th) * 1j * Rtrunc * np.exp(1j * arc_th)
        weights[-1][-1] += arc_w[0]
        nodes.append(arc_nodes[1:])
        weights.append(arc_w[1:])
    in_nodes = (ths[::-1])[1 if with_arc else 0:] * np.exp(1j * theta_in)
    in_w = -trapezoid_weights(ths)[::-1] * np.exp(1j * theta_in)
    if with_arc:
        weights[-1][-1] += in_w[0]
        in_w = in_w[1:]
    keep = np.abs(in_nodes) > 0  # drop the origin endpoint, fold its weight
    if not keep[-1]:
        in_w[-2] += in_w[-1]
        in_nodes, in_w = in_nodes[:-1], in_w[:-1]
    nodes.append(in_nodes)
    weights.append(in_w)
    return Contour(np.concatenate(nodes), np.concatenate(weights), Rtrunc=Rtrunc,
                   closed=False, pieces=("ray-out", "arc", "ray-in"))


def quadrant_boundary(which, Rtrunc, n=400):
    """Truncated, positively oriented boundary of quadrant D1 (second) or
    D2 (first) of a complex parameter plane."""
    if which == "D2":
        return sector_boundary(np.pi / 2.0, 0.0, Rtrunc, n)
    if which == "D1":
        return sector_boundary(np.pi, np.pi / 2.0, Rtrunc, n)
    raise ValueError("which must be 'D1' or 'D2'")


@dataclass
class IntegralResult:
    value: complex
    phase_margin: float

    def __complex__(self):
        return complex(self.value)


def _phase_steps(vals, axis):
    a = np.abs(vals)
    tiny = a.max() * 1e-12
    ph = np.unwrap(np.angle(np.where(a > tiny, vals, 1.0)), axis=axis)
    d = np.abs(np.diff(ph, axis=axis))
    mask = np.minimum(np.abs(np.take(vals, range(vals.shape[axis] - 1), axis=axis)),
                      np.abs(np.take(vals, range(1, vals.shape[axis]), axis=axis))) > tiny
    return float(np.max(d * mask)) if d.size else 0.0


def integrate_oscillatory(sampler, axes, budget=None):
    """Nested composite trapezoid over up to 3 real intervals.

    ``axes`` is a list of (lo, hi, n); ``sampler`` is called with one
    meshgrid argument per axis.  The sampled local phase advance per step
    is checked against the budget; violations raise ResolutionError with a
    sufficient sample count.
    """
    budget = budget or PhaseBudget()
    if not 1 <= len(axes) <= 3:
        raise ValueError("1 to 3 axes supported")
    grids = [np.linspace(lo, hi, n) for (lo, hi, n) in axes]
    mesh = np.meshgrid(*grids, indexing="ij")
    vals = np.asarray(sampler(*mesh), dtype=np.complex128)
    margin = 0.0
    for ax, g in enumerate(grids):
        if len(g) < 2:
            continue
        step = _phase_steps(vals, ax)
        if step > budget.max_step:
            needed = int(np.ceil(len(g) * step / budget.max_step)) + 1
            raise ResolutionError(ax, needed)
        margin = max(margin, step)
    out = vals
    for g in reversed(grids):
        w = trapezoid_weights(g)
        out = np.tensordot(out, w, axes=([out.ndim - 1], [0]))
    return IntegralResult(complex(out), budget.max_step - margin)


# ----------------------------------------------------------------------
# Cauchy-kernel area integral and the Pompeiu identity
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class DiskDomain:
    center: complex = 0.0 + 0.0j
    radius: float = 1.0
    n_rho: int = 400
    n_theta: int = 400

    def boundary(self, n=None):
        return circle(self.center, self.radius, n or (2 * self.n_theta))

    def contains(self, z, margin=1e-9):
        return abs(z - self.center) < self.radius * (1.0 - margin)


@dataclass(frozen=True)
class RectDomain:
    x0: float
    x1: float
    y0: float
    y1: float
    nx: int = 200
    ny: int = 200

    def boundary(self, n=800):
        nodes, weights = _polyline(
            [complex(self.x0, self.y0), complex(self.x1, self.y0),
             complex(self.x1, self.y1), complex(self.x0, self.y1),
             complex(self.x0, self.y0)], n)
        return Contour(nodes, weights, closed=True, pieces=("rect",))

    def contains(self, z, margin=1e-9):
        mx = (self.x1 - self.x0) * margin
        my = (self.y1 - self.y0) * margin
        return (self.x0 + mx < z.real < self.x1 - mx) and (self.y0 + my < z.imag < self.y1 - my)


def _disk_cauchy_area(f, dom, z):
    # probe-centered polar: the rho Jacobian cancels the pole exactly, so
    # the singular cell needs no special casing at all.
    b = z - dom.center
    th = np.linspace(0.0, 2.0 * np.pi, dom.n_theta, endpoint=False)
    e = np.exp(1j * th)
    be = (np.conj(b) * e).real
    rho_max = -be + np.sqrt(be * be + dom.radius ** 2 - abs(b) ** 2)
    u = np.linspace(0.0, 1.0, dom.n_rho)
    rho = rho_max[:, None] * u[None, :]
    zeta = z + rho * e[:, None]
    vals = f(zeta) * np.conj(e)[:, None]
    wu = trapezoid_weights(u)
    inner = (vals @ wu) * rho_max
    return -(1.0 / np.pi) * inner.sum() * (2.0 * np.pi / dom.n_theta)


def _rect_cell_polar(f, z, cx0, cx1, cy0, cy1, n_th=64, n_rho=16):
    th = np.linspace(0.0, 2.0 * np.pi, n_th, endpoint=False)
    c, s = np.cos(th), np.sin(th)
    rho_max = np.full(n_th, np.inf)
    with np.errstate(divide="ignore", invalid="ignore"):
        for lim, trig, sign in ((cx1 - z.real, c, 1), (z.real - cx0, c, -1),
                                (cy1 - z.imag, s, 1), (z.imag - cy0, s, -1)):
            d = np.where(sign * trig > 1e-15, lim / np.maximum(sign * trig, 1e-300), np.inf)
            rho_max = np.minimum(rho_max, d)
    u = np.linspace(0.0, 1.0, n_rho)
    rho = rho_max[:, None] * u[None, :]
    zeta = z + rho * np.exp(1j * th)[:, None]
    vals = f(zeta) * np.exp(-1j * th)[:, None]
    wu = trapezoid_weights(u)
    inner = (vals @ wu) * rho_max
    return inner.sum() * (2.0 * np.pi / n_th)


def _rect_cauchy_area(f, dom, z, block=2):
    xs = np.linspace(dom.x0, dom.x1, dom.nx)
    ys = np.linspace(dom.y0, dom.y1, dom.ny)
    hx, hy = xs[1] - xs[0], ys[1] - ys[0]
    on_x = abs((z.real - dom.x0) / hx - round((z.real - dom.x0) / hx)) < 1e-12
    on_y = abs((z.imag - dom.y0) / hy - round((z.imag - dom.y0) / hy)) < 1e-12
    if on_x or on_y:
        raise PlacementError("z lies on a grid line; singular-cell rule not applicable")
    ix = int((z.real - dom.x0) / hx)
    iy = int((z.imag - dom.y0) / hy)
    # the polar-treated block: the singular cell plus `block` rings of
    # neighbours (the 1/(zeta-z) derivatives there defeat trapezoid).
    ax = max(0, ix - block)
    bx = min(dom.nx - 2, ix + block)
    ay = max(0, iy - block)
    by = min(dom.ny - 2, iy + block)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    Z = X + 1j * Y
    vals = f(Z) / (Z - z)
    cell_sum = 0.25 * hx * hy * (vals[:-1, :-1] + vals[1:, :-1] + vals[:-1, 1:] + vals[1:, 1:])
    cell_sum[ax:bx + 1, ay:by + 1] = 0.0
    total = cell_sum.sum()
    blk = _rect_cell_polar(f, z, xs[ax], xs[bx + 1], ys[ay], ys[by + 1],
                           n_th=256, n_rho=24 * (block + 1))
    return -(1.0 / np.pi) * (total + blk)


def cauchy_area_integral(f, domain, z):
    """(1/2 i pi) Iint d zeta ^ d zeta-bar f / (zeta - z)
    = -(1/pi) Iint f(zeta) / (zeta - z) dA over the domain."""
    z = complex(z)
    if not domain.contains(z):
        raise PlacementError("z must lie strictly inside the area domain")
    if isinstance(domain, DiskDomain):
        return _disk_cauchy_area(f, domain, z)
    return _rect_cauchy_area(f, domain, z)


def cauchy_boundary_integral(f, contour, z):
    """(1/2 i pi) oint f(zeta)/(zeta - z) d zeta."""
    vals = f(contour.nodes) / (contour.nodes - z)
    return np.sum(vals * contour.weights) / (2j * np.pi)


def pompeiu_reconstruct(f, dbar_f, domain, z, contour=None):
    """Reconstruct f(z) from its boundary values and d-bar derivative."""
    contour = contour or domain.boundary()
    return cauchy_boundary_integral(f, contour, z) + cauchy_area_integral(dbar_f, domain, z)
