"""Physical-space data model.

Truncated grids, sampled fields, boundary traces, discrete calculus and
the field file formats.  The x direction is sampled periodically on
[-Lx, Lx) (uniform weights, which is the trapezoid rule for periodic or
decaying data); y and t are closed intervals [0, Ly], [0, T_max] with
trapezoid weights.  All discrete calculus (central differences, cumulative
trapezoid) lives here; no other module differentiates grid data.
"""

import io
from dataclasses import dataclass, field as dfield

import numpy as np

DECAY_TOL = 1e-8


class FieldFormatError(ValueError):
    """Malformed field file (carries the offending line number)."""


class DecayError(ValueError):
    """Input field does not decay at the truncated frame."""


@dataclass(frozen=True)
class GridSpec:
    """Uniform truncated grids: x in [-Lx, Lx) periodic, y in [0, Ly],
    t in [0, T_max]."""

    Lx: float = 12.0
    Ly: float = 12.0
    T_max: float = 1.0
    nx: int = 48
    ny: int = 33
    nt: int = 13

    def __post_init__(self):
        if min(self.nx, self.ny, self.nt) < 2:
            raise ValueError("grid needs at least 2 samples per axis")
        if min(self.Lx, self.Ly, self.T_max) <= 0:
            raise ValueError("grid extents must be positive")

    @property
    def dx(self):
        return 2.0 * self.Lx / self.nx

    @property
    def dy(self):
        return self.Ly / (self.ny - 1)

    @property
    def dt(self):
        return self.T_max / (self.nt - 1)

    @property
    def xs(self):
        return -self.Lx + self.dx * np.arange(self.nx)

    @property
    def ys(self):
        return np.linspace(0.0, self.Ly, self.ny)

    @property
    def ts(self):
        return np.linspace(0.0, self.T_max, self.nt)


@dataclass
class PhysicalField:
    """Sampled field on the (x, y, t) grid; unused axes have length 1.

    ``enforce_decay`` marks data claiming Schwartz decay in x; fields built
    with the zero-x-mean correction carry a constant-in-x offset of size
    O(1/Lx) and set it to False (the correction is recorded instead).
    """

    grid: GridSpec
    samples: np.ndarray
    role: str = "q"
    enforce_decay: bool = True
    mean_correction: float = 0.0

    def __post_init__(self):
        self.samples = np.asarray(self.samples)
        if self.samples.ndim != 3:
            raise ValueError("samples must be (nx, ny, nt) with unused axes = 1")

    def frame_ratio(self, axis):
        """max |f| on the outer 10% frame over max |f|, along one axis."""
        a = np.abs(self.samples)
        peak = a.max()
        if peak == 0.0:
            return 0.0
        n = self.samples.shape[axis]
        w = max(1, int(np.ceil(0.1 * n)))
        lo = np.take(a, range(w), axis=axis).max()
        hi = np.take(a, range(n - w, n), axis=axis).max()
        return max(lo, hi) / peak

    def require_decay(self, axis=0, tol=DECAY_TOL):
        if not self.enforce_decay:
            return
        r = self.frame_ratio(axis)
        if r > tol:
            raise DecayError(
                f"field role={self.role!r} frame ratio {r:.3e} exceeds {tol:.1e} on axis {axis}"
            )

    def x_mean(self):
        """Per-(y,t) x-average (the KP constraint wants this to vanish)."""
        return self.samples.mean(axis=0)

    def zero_x_mean(self):
        """Return a copy with the x-mean removed; the correction size is
        recorded on the new field."""
        corr = self.x_mean()
        out = PhysicalField(self.grid, self.samples - corr[None, :, :], role=self.role,
                            enforce_decay=False)
        out.mean_correction = float(np.max(np.abs(corr)))
        return out


@dataclass
class BoundaryTraces:
    """Boundary data g(x,t), h(x,t) (or v, w in the linear problem) on the
    x grid times an arbitrary uniform tau grid, with the derived arrays the
    kernels need cached once."""

    grid: GridSpec
    taus: np.ndarray
    g: np.ndarray
    h: np.ndarray
    g_x: np.ndarray = dfield(default=None)
    h_antideriv: np.ndarray = dfield(default=None)

    def __post_init__(self):
        if self.g.shape != (self.grid.nx, len(self.taus)):
            raise ValueError("trace shape mismatch")
        if self.g_x is None:
            self.g_x = derivative_x(self.g, self.grid.dx)
        if self.h_antideriv is None:
            self.h_antideriv = antiderivative_x_array(self.h, self.grid.dx)


def derivative_x(f, dx):
    """Central differences along axis 0, periodic wrap."""
    return (np.roll(f, -1, axis=0) - np.roll(f, 1, axis=0)) / (2.0 * dx)


def antiderivative_x_array(f, dx):
    """Cumulative trapezoid along axis 0 from the left edge (baseline 0
    at x = -Lx)."""
    f = np.asarray(f)
    out = np.zeros_like(f, dtype=np.result_type(f, 1.0))
    np.cumsum(0.5 * dx * (f[1:] + f[:-1]), axis=0, out=out[1:])
    return out


def antiderivative_x(fld, tol=DECAY_TOL):
    """dx^{-1} f for a field slice: integral from the left edge.

    Rejects inputs that fail the left-frame decay check (the lower limit
    of the defining integral sits at -infinity).
    """
    fld.require_decay(axis=0, tol=tol)
    return antiderivative_x_array(fld.samples, fld.grid.dx)


def fourier_x(samples, xs, l):
    """trapezoid of e^{-i l x} f over the x window; l may be an array.

    Periodic-uniform x samples make this the plain weighted sum.
    """
    l = np.atleast_1d(np.asarray(l, dtype=np.complex128))
    E = np.exp(-1j * np.outer(l, xs))
    dx = xs[1] - xs[0]
    flat = samples.reshape(samples.shape[0], -1)
    out = dx * (E @ flat)
    return out.reshape((len(l),) + samples.shape[1:])


def inverse_fourier_x(fhat, ls, x):
    """(1/2pi) trapezoid of e^{i l x} fhat over the truncated l grid."""
    x = np.atleast_1d(x)
    E = np.exp(1j * np.outer(x, ls))
    w = trapezoid_weights(ls)
    out = (E * w[None, :]) @ fhat / (2.0 * np.pi)
    return out if out.shape != (1,) else out[0]


def trapezoid_weights(s):
    """Composite trapezoid weights of an arbitrary 1D node set."""
    s = np.asarray(s, dtype=float)
    w = np.zeros_like(s)
    if len(s) > 1:
        d = np.diff(s)
        w[:-1] += 0.5 * d
        w[1:] += 0.5 * d
    return w


def y_weights(grid):
    w = np.full(grid.ny, grid.dy)
    w[0] *= 0.5
    w[-1] *= 0.5
    return w


# ----------------------------------------------------------------------
# field files
# ----------------------------------------------------------------------

MAGIC = "KPFIELD 1"


def store_field(fld, path):
    """Text format: magic, role line, dims, extents, then row-major samples
    (x fastest) as 're im' pairs."""
    s = np.asarray(fld.samples, dtype=np.complex128)
    nx, ny, nt = s.shape
    with open(path, "w") as fh:
        fh.write(MAGIC + "\n")
        flags = "" if fld.enforce_decay else " schwartz=0"
        fh.write(fld.role + flags + "\n")
        fh.write(f"{nx} {ny} {nt}\n")
        fh.write(f"{fld.grid.Lx!r} {fld.grid.Ly!r} {fld.grid.T_max!r}\n")
        flat = s.transpose(2, 1, 0).reshape(-1)
        for v in flat:
            fh.write(f"{v.real!r} {v.imag!r}\n")


def load_field(path):
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0].strip() != MAGIC:
        raise FieldFormatError("line 1: missing KPFIELD 1 magic")
    if len(lines) < 4:
        raise FieldFormatError(f"line {len(lines)}: truncated header")
    tokens = lines[1].split()
    if not tokens:
        raise FieldFormatError("line 2: empty role")
    role = tokens[0]
    enforce = "schwartz=0" not in tokens[1:]
    try:
        nx, ny, nt = (int(v) for v in lines[2].split())
    except ValueError as exc:
        raise FieldFormatError(f"line 3: bad dims ({exc})") from None
    if min(nx, ny, nt) < 1:
        raise FieldFormatError("line 3: dims must be positive")
    try:
        Lx, Ly, Tm = (float(v) for v in lines[3].split())
    except ValueError as exc:
        raise FieldFormatError(f"line 4: bad extents ({exc})") from None
    need = nx * ny * nt
    if len(lines) - 4 < need:
        raise FieldFormatError(f"line {len(lines)}: expected {need} samples, got {len(lines) - 4}")
    vals = np.empty(need, dtype=np.complex128)
    for i in range(need):
        parts = lines[4 + i].split()
        try:
            re, im = float(parts[0]), float(parts[1])
        except (IndexError, ValueError):
            raise FieldFormatError(f"line {5 + i}: bad sample") from None
        if not (np.isfinite(re) and np.isfinite(im)):
            raise FieldFormatError(f"line {5 + i}: non-finite sample")
        vals[i] = complex(re, im)
    samples = vals.reshape(nt, ny, nx).transpose(2, 1, 0)
    g = GridSpec(Lx=Lx, Ly=Ly, T_max=Tm, nx=max(nx, 2), ny=max(ny, 2), nt=max(nt, 2))
    fld = PhysicalField(g, samples, role=role, enforce_decay=enforce)
    return fld


def export_csv(fld, path):
    """One row per grid point with coordinate columns."""
    s = np.asarray(fld.samples)
    nx, ny, nt = s.shape
    xs = fld.grid.xs[:nx] if nx > 1 else np.array([0.0])
    ys = fld.grid.ys[:ny] if ny > 1 else np.array([0.0])
    ts = fld.grid.ts[:nt] if nt > 1 else np.array([0.0])
    buf = io.StringIO()
    buf.write("x,y,t,re,im\n")
    for it in range(nt):
        for iy in range(ny):
            for ix in range(nx):
                v = complex(s[ix, iy, it])
                buf.write(f"{xs[ix]},{ys[iy]},{ts[it]},{v.real},{v.imag}\n")
    with open(path, "w") as fh:
        fh.write(buf.getvalue())
