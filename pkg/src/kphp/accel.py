"""Hot numeric kernels: numba-jitted implementations with pure-numpy twins.

The package spends essentially all of its runtime in four kinds of inner
loops:

* dense complex "transform" matmuls (wavenumber transforms / syntheses),
* one-sided oscillatory cumulative integrals of the form
  ``I(s_i) = int e^{P (s - s_i)} G(s) ds`` taken over ``(s_0, s_i)`` or
  ``(s_i, s_end)`` with ``Re P`` one-signed on the valid range,
* plane-wave mode sums (evaluation of spectrally represented fields), and
* resolvent-type sums ``sum_m c_m (e^{z_m T} - 1)/z_m``.

Each kernel exists twice: a ``_nb`` version compiled with ``numba.njit``
and a ``_np`` reference version in plain numpy.  Selection happens once at
import: setting ``KPHP_DISABLE_NUMBA=1`` (or running without numba
installed) picks the numpy path.  ``KPHP_THREADS`` caps the numba thread
count.  ``benchmarks/bench_kernels.py`` times the two paths against each
other.

The oscillatory cumulatives refine each base interval with enough uniform
substeps that the phase advance per step stays below ``PHASE_BUDGET``
(plain trapezoid on the refined grid; integrand values come from 4-point
Lagrange interpolation of the base samples).  The recurrence form keeps
every weight bounded by one, so no overflow is possible as long as the
caller respects the sign condition on ``Re P``.
"""

import os

import numpy as np

PHASE_BUDGET = np.pi / 4.0
_MAX_SUBSTEPS = 20000

_disable = os.environ.get("KPHP_DISABLE_NUMBA", "0") == "1"

if not _disable:
    try:
        import numba
        from numba import njit, prange

        _threads = os.environ.get("KPHP_THREADS")
        if _threads:
            numba.set_num_threads(max(1, int(_threads)))
        HAVE_NUMBA = True
    except ImportError:  # pragma: no cover - exercised only without numba
        HAVE_NUMBA = False
else:
    HAVE_NUMBA = False

if not HAVE_NUMBA:  # minimal stand-ins so the _nb definitions still parse
    def njit(*args, **kwargs):
        def deco(f):
            return f

        if args and callable(args[0]):
            return args[0]
        return deco

    def prange(n):  # noqa: D103
        return range(n)


def substeps(im_p, h, budget=PHASE_BUDGET):
    """Substep counts keeping |Im P| * h / m below the phase budget."""
    m = np.ceil(np.abs(im_p) * h / budget).astype(np.int64)
    return np.clip(m, 1, _MAX_SUBSTEPS)


# ----------------------------------------------------------------------
# dense transforms (zgemm does the heavy lifting either way)
# ----------------------------------------------------------------------

def xform_np(E, F):
    """(nl, nx) @ (nx, M) complex matmul."""
    return E @ F


@njit(cache=True, parallel=True)
def xform_nb(E, F):  # pragma: no cover - timing alternative
    nl, nx = E.shape
    m = F.shape[1]
    out = np.zeros((nl, m), dtype=np.complex128)
    for i in prange(nl):
        for j in range(nx):
            e = E[i, j]
            for c in range(m):
                out[i, c] += e * F[j, c]
    return out


# ----------------------------------------------------------------------
# 4-point Lagrange weights on a uniform index grid
# ----------------------------------------------------------------------

@njit(cache=True, inline="always")
def _lagrange4(x, js):
    w = np.empty(4)
    for a in range(4):
        num = 1.0
        den = 1.0
        xa = js + a
        for b in range(4):
            if b != a:
                num *= x - (js + b)
                den *= xa - (js + b)
        w[a] = num / den
    return w


def _lagrange4_np(x, js):
    w = np.empty(4)
    for a in range(4):
        num = 1.0
        den = 1.0
        xa = js + a
        for b in range(4):
            if b != a:
                num *= x - (js + b)
                den *= xa - (js + b)
        w[a] = num / den
    return w


# ----------------------------------------------------------------------
# oscillatory cumulative integrals
# ----------------------------------------------------------------------

def _osc_cum_single_np(g, P, h, m):
    """Reference cumulative for one rate P over one column g (n,).

    forward:  I[i] = int_{s0}^{s_i} e^{P (s - s_i)} g(s) ds
    """
    n = g.shape[0]
    out = np.zeros(n, dtype=np.complex128)
    hf = h / m
    step = np.exp(P * hf)          # weight advance inside a base interval
    shrink = np.exp(-P * h)        # anchor move up by one base interval
    for i in range(n - 1):
        # local integral over [s_i, s_{i+1}] anchored at s_{i+1}
        acc = 0.0 + 0.0j
        for q in range(m + 1):
            x = i + q / m
            js = min(max(i - 1, 0), n - 4)
            w = _lagrange4_np(x, js)
            gq = w[0] * g[js] + w[1] * g[js + 1] + w[2] * g[js + 2] + w[3] * g[js + 3]
            wq = hf if 0 < q < m else hf / 2.0
            # e^{P (s_q - s_{i+1})} = step^(q - m)
            acc += wq * gq * step ** (q - m)
        out[i + 1] = shrink * out[i] + acc
    return out


def osc_cum_forward_np(G, P, h):
    """I[l, i, c] = int_{s_0}^{s_i} e^{P_l (s - s_i)} G[l, :, c] ds.

    Requires Re P >= 0 (weights bounded by one).
    """
    nl, n, nc = G.shape
    out = np.zeros_like(G)
    ms = substeps(P.imag, h)
    for l in range(nl):
        for c in range(nc):
            out[l, :, c] = _osc_cum_single_np(G[l, :, c], P[l], h, int(ms[l]))
    return out


def osc_cum_backward_np(G, P, h):
    """I[l, i, c] = int_{s_i}^{s_end} e^{P_l (s - s_i)} G[l, :, c] ds.

    Requires Re P <= 0.  Implemented by index reversal of the forward
    recurrence with the rate negated.
    """
    out = osc_cum_forward_np(G[:, ::-1, :], -P, h)
    return out[:, ::-1, :]


@njit(cache=True, parallel=True)
def osc_cum_forward_nb(G, P, h):
    nl, n, nc = G.shape
    out = np.zeros_like(G)
    for l in prange(nl):
        p = P[l]
        m = int(min(max(abs(p.imag) * h / PHASE_BUDGET, 1.0), float(_MAX_SUBSTEPS)) + 0.999999)
        hf = h / m
        step = np.exp(p * hf)
        shrink = np.exp(-p * h)
        for c in range(nc):
            prev = 0.0 + 0.0j
            for i in range(n - 1):
                acc = 0.0 + 0.0j
                ph = np.exp(-p * h)  # phase at q=0: step^(-m)
                js = min(max(i - 1, 0), n - 4)
                for q in range(m + 1):
                    x = i + q / m
                    w = _lagrange4(x, js)
                    gq = (w[0] * G[l, js, c] + w[1] * G[l, js + 1, c]
                          + w[2] * G[l, js + 2, c] + w[3] * G[l, js + 3, c])
                    wq = hf
                    if q == 0 or q == m:
                        wq = hf / 2.0
                    acc += wq * gq * ph
                    ph *= step
                prev = shrink * prev + acc
                out[l, i + 1, c] = prev
    return out


def osc_cum_backward_nb(G, P, h):
    out = osc_cum_forward_nb(np.ascontiguousarray(G[:, ::-1, :]), -P, h)
    return np.ascontiguousarray(out[:, ::-1, :])


# ----------------------------------------------------------------------
# plane-wave mode sums (spectrally represented real fields)
# ----------------------------------------------------------------------

def mode_sum_np(coef, kx, ky, om, px, py, pt):
    """sum_m coef_m e^{i(kx x_p + ky y_p + om t_p)} at a list of points."""
    out = np.zeros(px.shape[0], dtype=np.complex128)
    for lo in range(0, px.shape[0], 256):
        hi = min(lo + 256, px.shape[0])
        ph = np.exp(1j * (np.outer(px[lo:hi], kx) + np.outer(py[lo:hi], ky)
                          + np.outer(pt[lo:hi], om)))
        out[lo:hi] = ph @ coef
    return out


@njit(cache=True, parallel=True)
def mode_sum_nb(coef, kx, ky, om, px, py, pt):
    npts = px.shape[0]
    nm = coef.shape[0]
    out = np.zeros(npts, dtype=np.complex128)
    for p in prange(npts):
        acc = 0.0 + 0.0j
        for m in range(nm):
            acc += coef[m] * np.exp(1j * (kx[m] * px[p] + ky[m] * py[p] + om[m] * pt[p]))
        out[p] = acc
    return out


# ----------------------------------------------------------------------
# resolvent sums: sum_m c_m * (e^{z T} - 1)/z,  z = i(om_m - Om_k)
# ----------------------------------------------------------------------

def expm1_div(z, T):
    """(e^{z T} - 1) / z, stable near z = 0 (-> T)."""
    z = np.asarray(z, dtype=np.complex128)
    small = np.abs(z) * T < 1e-8
    zs = np.where(small, 1.0, z)
    out = (np.exp(zs * T) - 1.0) / zs
    ser = T * (1.0 + z * T / 2.0 + (z * T) ** 2 / 6.0)
    return np.where(small, ser, out)


def resolvent_sum_np(c, om_m, Om_k, T):
    """S[k] = sum_m c_m (e^{i(om_m - Om_k) T} - 1)/(i(om_m - Om_k))."""
    z = 1j * (om_m[None, :] - Om_k[:, None])
    return np.sum(c[None, :] * expm1_div(z, T), axis=1)


@njit(cache=True, parallel=True)
def resolvent_sum_nb(c, om_m, Om_k, T):
    nk = Om_k.shape[0]
    nm = om_m.shape[0]
    out = np.zeros(nk, dtype=np.complex128)
    for k in prange(nk):
        acc = 0.0 + 0.0j
        for m in range(nm):
            z = 1j * (om_m[m] - Om_k[k])
            if abs(z) * T < 1e-8:
                acc += c[m] * T * (1.0 + z * T / 2.0 + (z * T) ** 2 / 6.0)
            else:
                acc += c[m] * (np.exp(z * T) - 1.0) / z
        out[k] = acc
    return out


# ----------------------------------------------------------------------
# path selection
# ----------------------------------------------------------------------

if HAVE_NUMBA:
    xform = xform_np          # zgemm beats explicit loops; keep _nb for the bench
    osc_cum_forward = osc_cum_forward_nb
    osc_cum_backward = osc_cum_backward_nb
    mode_sum = mode_sum_nb
    resolvent_sum = resolvent_sum_nb
else:
    xform = xform_np
    osc_cum_forward = osc_cum_forward_np
    osc_cum_backward = osc_cum_backward_np
    mode_sum = mode_sum_np
    resolvent_sum = resolvent_sum_np
