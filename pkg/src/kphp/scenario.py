"""Scenario construction and configuration.

A scenario bundles the oracle-generated data at one amplitude with the
grids every module consumes: the interior field q = eps * u on the coarse
(x, y, t) grid, boundary traces g = eps * v, h = eps * w with their
derived combinations on the fine tau grid, and the solver parameters.

Configuration files are flat ``key = value`` text with ``[section]``
headers; unknown keys are rejected.
"""

from dataclasses import dataclass, field as dfield, fields as dfields

import numpy as np

from .grid import GridSpec, PhysicalField
from .oracle import PlaneOracle, gaussian_bump
from .volterra import DirectData


@dataclass
class ScenarioConfig:
    """Everything a batch run needs; defaults give the desk-scale setup."""

    # grid
    Lx: float = 12.0
    Ly: float = 12.0
    T_max: float = 1.0
    nx: int = 48
    ny: int = 33
    nt: int = 13
    tau_refine: int = 6
    # data
    source: str = "gaussian"          # or a field-file path
    x0: float = 0.0
    y0: float = 3.0
    eps: float = 1e-2
    oracle_nx: int = 192
    oracle_ny: int = 384
    oracle_ylo: float = -18.0
    oracle_yperiod: float = 48.0
    # spectral discretization
    l_max: float = 6.0
    dl: float = 0.05
    k1_cut: float = 7.0
    lam_max: float = 10.0
    n_lam: int = 81
    # tolerances
    fp_tol: float = 1e-11
    decay_tol: float = 1e-8
    tail_tol: float = 1e-3
    # printed-variant switches
    variant_phiminus1i: str = "printed"    # printed | uniform
    variant_psi2: str = "symmetric"        # symmetric | printed

    @classmethod
    def from_file(cls, path):
        cfg = cls()
        valid = {f.name for f in dfields(cls)}
        with open(path) as fh:
            for ln, raw in enumerate(fh, 1):
                line = raw.split("#")[0].strip()
                if not line or (line.startswith("[") and line.endswith("]")):
                    continue
                if "=" not in line:
                    raise ValueError(f"{path}:{ln}: expected key = value")
                key, val = (s.strip() for s in line.split("=", 1))
                if key not in valid:
                    raise ValueError(f"{path}:{ln}: unknown key {key!r}")
                cur = getattr(cfg, key)
                if isinstance(cur, bool):
                    setattr(cfg, key, val.lower() in ("1", "true", "yes"))
                elif isinstance(cur, int):
                    setattr(cfg, key, int(val))
                elif isinstance(cur, float):
                    setattr(cfg, key, float(val))
                else:
                    setattr(cfg, key, val)
        cfg.validate()
        return cfg

    def validate(self):
        for name in ("Lx", "Ly", "T_max", "eps", "l_max", "dl", "lam_max"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.variant_phiminus1i not in ("printed", "uniform"):
            raise ValueError("variant_phiminus1i must be printed|uniform")
        if self.variant_psi2 not in ("symmetric", "printed"):
            raise ValueError("variant_psi2 must be symmetric|printed")
        return self

    def grid(self):
        return GridSpec(Lx=self.Lx, Ly=self.Ly, T_max=self.T_max,
                        nx=self.nx, ny=self.ny, nt=self.nt)


@dataclass
class Scenario:
    """Oracle plus sampled data at one amplitude."""

    cfg: ScenarioConfig
    oracle: PlaneOracle
    grid: GridSpec
    taus: np.ndarray
    data: DirectData
    eps: float

    @classmethod
    def build(cls, cfg=None, eps=None):
        cfg = cfg or ScenarioConfig()
        eps = cfg.eps if eps is None else eps
        orc = PlaneOracle.from_initial(
            gaussian_bump(x0=cfg.x0, y0=cfg.y0), Lx=cfg.Lx, y_lo=cfg.oracle_ylo,
            y_period=cfg.oracle_yperiod, n=(cfg.oracle_nx, cfg.oracle_ny))
        grid = cfg.grid()
        ntf = (grid.nt - 1) * cfg.tau_refine + 1
        taus = np.linspace(0.0, grid.T_max, ntf)
        data = build_direct_data(orc, grid, taus, eps)
        return cls(cfg, orc, grid, taus, data, eps)

    def rescaled(self, eps):
        """Same oracle and grids at another amplitude (data is linear in eps)."""
        s = eps / self.eps
        d = self.data
        data = DirectData(d.grid, d.taus, d.q * s, d.A * s, d.B * s)
        return Scenario(self.cfg, self.oracle, self.grid, self.taus, data, eps)

    def q_field(self):
        return PhysicalField(self.grid, self.data.q, role="q", enforce_decay=False)


def build_direct_data(orc, grid, taus, eps):
    """Sample q, g, h and the boundary combinations A, B.

    The trace derivative g_x and the antiderivative of h are evaluated from
    the oracle's spectral representation (exact on the periodic window, with
    the antiderivative referenced to zero at the left edge).
    """
    xs, ys, tc = grid.xs, grid.ys, grid.ts
    q = eps * orc.eval_grid(xs, ys, tc)
    v = orc.eval_grid(xs, [0.0], taus)[:, 0, :]
    gx = orc.eval_grid(xs, [0.0], taus, deriv_x=1)[:, 0, :]
    xs_ref = np.concatenate([[float(xs[0])], xs])
    hant = orc.eval_grid(xs_ref, [0.0], taus, deriv_y=1, deriv_x=-1)[:, 0, :]
    hant = hant[1:] - hant[0]
    A = 3.0 * eps * (gx - 1j * hant)
    B = 6j * eps * v
    return DirectData(grid, taus, q.astype(np.complex128), A.astype(np.complex128),
                      B.astype(np.complex128))
