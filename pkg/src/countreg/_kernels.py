"""Hot per-observation kernels with a numba backend and a pure-numpy fallback.

Every kernel exists twice: a scalar-loop version compiled with ``numba.njit``
and a vectorized numpy/scipy version with identical semantics.  The active
backend is chosen once at import time: numba when it is importable, numpy
when it is not or when the environment variable ``COUNTREG_NO_NUMBA`` is set
to a non-empty value other than ``"0"``.  ``BACKEND`` names the choice;
``benchmarks/bench_kernels.py`` times the two implementations against each
other.

All kernels take the response as a float64 array of integer-valued counts,
the per-observation mean ``lam`` (and, for the zero-inflated family, the
structural-zero probability ``p``) as float64 arrays, and the shape
parameter ``tau`` as a scalar.  Reductions over observations happen in the
callers in fixed index order, so results are reproducible run to run.
"""

import math
import os

import numpy as np
from scipy.special import gammaln

__all__ = [
    "BACKEND",
    "nb_logpmf",
    "zinb_logpmf",
    "nb_grad_rows",
    "zinb_grad_rows",
    "digamma_diff",
    "warm_up",
]


# ---------------------------------------------------------------------------
# numpy implementations


def digamma_diff_numpy(y, tau):
    """psi(y + tau) - psi(tau) for integer-valued y >= 0.

    Uses the rational identity psi(y + tau) - psi(tau) = sum_{k<y} 1/(tau+k),
    which is exact for integer counts and free of the cancellation that the
    difference of two digamma evaluations suffers at large tau.  Cost grows
    with max(y); counts in regression data are small.
    """
    out = np.zeros(y.shape[0])
    top = int(y.max()) if y.size else 0
    for k in range(top):
        np.add(out, 1.0 / (tau + k), out=out, where=y > k)
    return out


def nb_logpmf_numpy(y, lam, tau):
    ltt = -np.log1p(lam / tau)  # log(tau / (lam + tau))
    out = tau * ltt
    pos = y > 0
    if np.any(pos):
        yp, lp = y[pos], lam[pos]
        with np.errstate(divide="ignore"):
            llam = np.log(lp)  # -inf when lam underflows to 0: pmf mass gone
        out[pos] = (
            gammaln(yp + tau)
            - gammaln(tau)
            - gammaln(yp + 1.0)
            + tau * ltt[pos]
            + yp * (llam - math.log(tau) + ltt[pos])
        )
    return out


def zinb_logpmf_numpy(y, lam, p, tau):
    out = np.empty(y.shape[0])
    zero = y == 0
    if np.any(zero):
        logb = tau * -np.log1p(lam[zero] / tau)
        pz = p[zero]
        with np.errstate(divide="ignore"):
            out[zero] = np.logaddexp(np.log(pz), np.log1p(-pz) + logb)
    pos = ~zero
    if np.any(pos):
        with np.errstate(divide="ignore"):
            out[pos] = np.log1p(-p[pos]) + nb_logpmf_numpy(y[pos], lam[pos], tau)
    return out


def nb_grad_rows_numpy(y, lam, tau):
    """Per-row NB score pieces: d/d(eta) and d/d(tau) of the log pmf."""
    denom = lam + tau
    ltt = -np.log1p(lam / tau)
    u = y - lam * (y + tau) / denom
    dt = digamma_diff_numpy(y, tau) + ltt + (lam - y) / denom
    return u, dt


def zinb_grad_rows_numpy(y, lam, p, tau):
    """Per-row ZINB score pieces: d/d(eta), d/d(s) and d/d(tau)."""
    n = y.shape[0]
    u = np.empty(n)
    v = np.empty(n)
    dt = np.empty(n)
    denom = lam + tau
    ltt = -np.log1p(lam / tau)
    pos = y > 0
    if np.any(pos):
        u[pos] = y[pos] - lam[pos] * (y[pos] + tau) / denom[pos]
        v[pos] = -p[pos]
        dt[pos] = (
            digamma_diff_numpy(y[pos], tau) + ltt[pos] + (lam[pos] - y[pos]) / denom[pos]
        )
    zero = ~pos
    if np.any(zero):
        pz, lz, dz, lttz = p[zero], lam[zero], denom[zero], ltt[zero]
        logb = tau * lttz
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            loga = np.logaddexp(np.log(pz), np.log1p(-pz) + logb)
            w0 = np.exp(np.log1p(-pz) + logb - loga)  # (1-p) P_NB(0) / P_ZINB(0)
            u[zero] = -(tau * lz / dz) * w0
            # p == 0 rows would hit 0 * inf when P_ZINB(0) underflows
            v[zero] = np.where(
                pz > 0.0, pz * (np.exp(np.log1p(-pz) - loga) - w0), 0.0
            )
            dt[zero] = w0 * (lttz + lz / dz)
    return u, v, dt


# ---------------------------------------------------------------------------
# numba implementations (scalar loops, math.lgamma)

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _HAVE_NUMBA = False

if _HAVE_NUMBA:

    @njit(cache=True)
    def _digamma_diff_one(y, tau):
        acc = 0.0
        k = 0.0
        while k < y:
            acc += 1.0 / (tau + k)
            k += 1.0
        return acc

    @njit(cache=True)
    def _nb_logpmf_one(y, lam, tau):
        ltt = -math.log1p(lam / tau)
        if y == 0.0:
            return tau * ltt
        if lam <= 0.0:
            return -math.inf
        return (
            math.lgamma(y + tau)
            - math.lgamma(tau)
            - math.lgamma(y + 1.0)
            + tau * ltt
            + y * (math.log(lam) - math.log(tau) + ltt)
        )

    @njit(cache=True)
    def _zinb_logpmf_one(y, lam, p, tau):
        if y == 0.0:
            logb = tau * -math.log1p(lam / tau)
            if p <= 0.0:
                return logb
            if p >= 1.0:
                return 0.0
            a = math.log(p)
            b = math.log1p(-p) + logb
            m = a if a > b else b
            return m + math.log(math.exp(a - m) + math.exp(b - m))
        if p >= 1.0:
            return -math.inf
        if p <= 0.0:
            return _nb_logpmf_one(y, lam, tau)
        return math.log1p(-p) + _nb_logpmf_one(y, lam, tau)

    @njit(cache=True)
    def digamma_diff_numba(y, tau):
        out = np.empty(y.shape[0])
        for i in range(y.shape[0]):
            out[i] = _digamma_diff_one(y[i], tau)
        return out

    @njit(cache=True)
    def nb_logpmf_numba(y, lam, tau):
        out = np.empty(y.shape[0])
        for i in range(y.shape[0]):
            out[i] = _nb_logpmf_one(y[i], lam[i], tau)
        return out

    @njit(cache=True)
    def zinb_logpmf_numba(y, lam, p, tau):
        out = np.empty(y.shape[0])
        for i in range(y.shape[0]):
            out[i] = _zinb_logpmf_one(y[i], lam[i], p[i], tau)
        return out

    @njit(cache=True)
    def nb_grad_rows_numba(y, lam, tau):
        n = y.shape[0]
        u = np.empty(n)
        dt = np.empty(n)
        for i in range(n):
            yi, li = y[i], lam[i]
            denom = li + tau
            u[i] = yi - li * (yi + tau) / denom
            dt[i] = _digamma_diff_one(yi, tau) - math.log1p(li / tau) + (li - yi) / denom
        return u, dt

    @njit(cache=True)
    def zinb_grad_rows_numba(y, lam, p, tau):
        n = y.shape[0]
        u = np.empty(n)
        v = np.empty(n)
        dt = np.empty(n)
        for i in range(n):
            yi, li, pi = y[i], lam[i], p[i]
            denom = li + tau
            ltt = -math.log1p(li / tau)
            if yi > 0.0:
                u[i] = yi - li * (yi + tau) / denom
                v[i] = -pi
                dt[i] = _digamma_diff_one(yi, tau) + ltt + (li - yi) / denom
            else:
                logb = tau * ltt
                if pi <= 0.0:
                    u[i] = -tau * li / denom
                    v[i] = 0.0
                    dt[i] = ltt + li / denom
                elif pi >= 1.0:
                    u[i] = 0.0
                    v[i] = 0.0
                    dt[i] = 0.0
                else:
                    a = math.log(pi)
                    b = math.log1p(-pi) + logb
                    m = a if a > b else b
                    loga = m + math.log(math.exp(a - m) + math.exp(b - m))
                    w0 = math.exp(math.log1p(-pi) + logb - loga)
                    u[i] = -(tau * li / denom) * w0
                    v[i] = pi * (math.exp(math.log1p(-pi) - loga) - w0)
                    dt[i] = w0 * (ltt + li / denom)
        return u, v, dt

else:  # pragma: no cover
    digamma_diff_numba = None
    nb_logpmf_numba = None
    zinb_logpmf_numba = None
    nb_grad_rows_numba = None
    zinb_grad_rows_numba = None


# ---------------------------------------------------------------------------
# backend selection

_DISABLED = os.environ.get("COUNTREG_NO_NUMBA", "") not in ("", "0")
BACKEND = "numba" if (_HAVE_NUMBA and not _DISABLED) else "numpy"

if BACKEND == "numba":
    digamma_diff = digamma_diff_numba
    nb_logpmf = nb_logpmf_numba
    zinb_logpmf = zinb_logpmf_numba
    nb_grad_rows = nb_grad_rows_numba
    zinb_grad_rows = zinb_grad_rows_numba
else:
    digamma_diff = digamma_diff_numpy
    nb_logpmf = nb_logpmf_numpy
    zinb_logpmf = zinb_logpmf_numpy
    nb_grad_rows = nb_grad_rows_numpy
    zinb_grad_rows = zinb_grad_rows_numpy


def warm_up():
    """Trigger JIT compilation of every kernel (no-op on the numpy backend)."""
    y = np.array([0.0, 3.0])
    lam = np.array([0.5, 2.0])
    p = np.array([0.0, 0.3])
    nb_logpmf(y, lam, 1.5)
    zinb_logpmf(y, lam, p, 1.5)
    nb_grad_rows(y, lam, 1.5)
    zinb_grad_rows(y, lam, p, 1.5)
    digamma_diff(y, 1.5)
