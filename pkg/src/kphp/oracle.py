"""Whole-plane spectral evolution oracle for the linearized equation.

u_t + u_xxx - 3 dx^{-1} u_yy = 0 evolved exactly in Fourier space on a
periodic box containing the half-plane window: every mode
e^{i(k1 x + k2 y)} advances with the phase Omega = k1^3 + 3 k2^2 / k1.
Modes with k1 = 0 (where dx^{-1} is undefined) are removed from the data;
the size of that zero-x-mean correction is recorded.

The oracle provides exact data access everywhere downstream: interior
fields, boundary traces v = u(x,0,t) and w = u_y(x,0,t) at arbitrary
times, and the per-k1 modal coefficients of the traces that the linear
solvers use for exact-in-tau transforms.
"""

from dataclasses import dataclass, field as dfield

import numpy as np

from . import accel
from .spectral import linear_phase


class ConstraintError(ValueError):
    """Zero-x-mean constraint violated beyond tolerance after correction."""


@dataclass
class PlaneOracle:
    Lx: float
    y_lo: float
    y_period: float
    kx: np.ndarray           # (Nx,) mode wavenumbers, kx[0] = 0
    ky: np.ndarray           # (Ny,)
    C: np.ndarray            # (Nx, Ny) mode coefficients, C[0, :] = 0
    Om: np.ndarray           # (Nx, Ny) linear phase, 0 on the k1 = 0 row
    mean_correction: float = 0.0
    _flat: tuple = dfield(default=None, repr=False)

    @classmethod
    def from_initial(cls, u0, Lx=12.0, y_lo=-6.0, y_period=24.0, n=(192, 192)):
        """Build from a callable u0(x, y) sampled on the periodic box."""
        nx, ny = n
        dx = 2.0 * Lx / nx
        dy = y_period / ny
        xs = -Lx + dx * np.arange(nx)
        ys = y_lo + dy * np.arange(ny)
        X, Y = np.meshgrid(xs, ys, indexing="ij")
        U = np.asarray(u0(X, Y), dtype=float)
        C = np.fft.fft2(U) / (nx * ny)
        kx = 2.0 * np.pi * np.fft.fftfreq(nx, d=dx)
        ky = 2.0 * np.pi * np.fft.fftfreq(ny, d=dy)
        # phase-reference the coefficients to absolute coordinates
        C = C * np.exp(-1j * (kx[:, None] * xs[0] + ky[None, :] * ys[0]))
        corr = float(np.max(np.abs(C[0, :])))
        C[0, :] = 0.0
        Om = np.zeros((nx, ny))
        Om[1:, :] = linear_phase(kx[1:, None], ky[None, :])
        orc = cls(Lx=Lx, y_lo=y_lo, y_period=y_period, kx=kx, ky=ky, C=C, Om=Om,
                  mean_correction=corr)
        orc.check_constraint()
        return orc

    def check_constraint(self, tol=1e-12):
        resid = float(np.max(np.abs(self.C[0, :])))
        if resid > tol:
            raise ConstraintError(f"k1=0 residual {resid:.2e} after correction")
        return resid

    # -- evaluation ----------------------------------------------------

    def _band(self, drop_tol=1e-15):
        keep = np.abs(self.C) > drop_tol * np.abs(self.C).max()
        rows = np.where(keep.any(axis=1))[0]
        cols = np.where(keep.any(axis=0))[0]
        return rows, cols

    def eval_grid(self, xs, ys, ts, deriv_y=0, deriv_x=0):
        """Real field (or a derivative: deriv_x = -1 gives the periodic
        antiderivative with zero mean) on a product grid (exact)."""
        rows, cols = self._band()
        kx = self.kx[rows]
        ky = self.ky[cols]
        C = self.C[np.ix_(rows, cols)] * (1j * ky[None, :]) ** deriv_y
        if deriv_x == -1:
            C = C / (1j * kx[:, None])
        else:
            C = C * (1j * kx[:, None]) ** deriv_x
        Om = self.Om[np.ix_(rows, cols)]
        Ex = np.exp(1j * np.outer(np.asarray(xs, float), kx))
        Ey = np.exp(1j * np.outer(ky, np.asarray(ys, float)))
        out = np.empty((len(xs), len(ys), len(ts)))
        for it, t in enumerate(np.atleast_1d(ts)):
            W = C * np.exp(1j * Om * t)
            out[:, :, it] = (Ex @ (W @ Ey)).real
        return out

    def flat_modes(self):
        if self._flat is None:
            rows, cols = self._band()
            sub = self.C[np.ix_(rows, cols)]
            keep = np.abs(sub) > 1e-15 * np.abs(sub).max()
            kxg, kyg = np.meshgrid(self.kx[rows], self.ky[cols], indexing="ij")
            omg = self.Om[np.ix_(rows, cols)]
            self._flat = (sub[keep], kxg[keep], kyg[keep], omg[keep])
        return self._flat

    def eval_points(self, px, py, pt, deriv_y=0):
        c, kx, ky, om = self.flat_modes()
        cc = c * (1j * ky) ** deriv_y
        vals = accel.mode_sum(cc, kx, ky, om,
                              np.asarray(px, float), np.asarray(py, float),
                              np.asarray(pt, float))
        return vals.real

    # -- boundary traces ----------------------------------------------

    def traces(self, xs, taus):
        """v(x,tau) = u(x,0,tau) and w = u_y(x,0,tau) arrays."""
        v = self.eval_grid(xs, [0.0], taus)[:, 0, :]
        w = self.eval_grid(xs, [0.0], taus, deriv_y=1)[:, 0, :]
        return v, w

    def trace_rows(self, k1_cut, drop_tol=1e-14):
        """Per-k1-mode trace coefficients for exact tau transforms.

        For each nonzero mode k1 with |k1| <= k1_cut returns
        (k1, om_m, cv_m, cw_m) such that
        int e^{-i k1 x} v(x,tau) dx = sum_m cv_m e^{i om_m tau}  (and w alike).
        """
        rows = []
        scale = 2.0 * self.Lx
        peak = np.abs(self.C).max()
        for mx in range(len(self.kx)):
            k1 = self.kx[mx]
            if mx == 0 or abs(k1) > k1_cut:
                continue
            row = self.C[mx, :]
            keep = np.abs(row) > drop_tol * peak
            if not keep.any():
                continue
            cv = scale * row[keep]
            cw = scale * row[keep] * (1j * self.ky[keep])
            rows.append((float(k1), self.Om[mx, keep].copy(), cv, cw, self.ky[keep].copy()))
        return rows


def gaussian_bump(x0=0.0, y0=3.0, sx=1.0, sy=1.0, amp=1.0):
    """The standard test datum exp(-(x-x0)^2/sx^2 - (y-y0)^2/sy^2)."""
    def f(x, y):
        return amp * np.exp(-((x - x0) / sx) ** 2 - ((y - y0) / sy) ** 2)
    return f
