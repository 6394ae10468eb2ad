"""Sampling kernels of the LIF sampler and their inner products.

Spike ``n`` measures ``<h_n, x> = theta_n`` with the kernel

    h_n(t) = exp(-alpha (t_n - t)) on [t_{n-1}, t_n), 0 elsewhere.

``h~_n`` denotes the bandlimited version of ``h_n``.  Inner products
``<h_m, h~_n>`` are computed two ways: from the Fourier coefficients of
the kernels (Parseval) and from the closed-form shifted-kernel expansion
through the function ``g``.
"""

import csv
import io
from dataclasses import dataclass, field, replace

import numpy as np

from .signal import (SERIES_THRESHOLD, PeriodicBandlimitedSignal, check_period,
                     harmonics, leak_integral)

__all__ = ['KernelSystem', 'sample_values', 'h_norm_sq', 'h_fourier', 'g_function',
           'g_shifted', 'gram_entry', 'gram_closed_form', 'gram_parseval',
           'inner_h_shifted', 'kernel_overlap', 'build_system', 'apply_H', 'kernel_signal',
           'matrix_to_csv']


def sample_values(train, params):
    """``theta_n = eps_n theta - c (1 - exp(-alpha dt_n)) / alpha``."""
    return (params.threshold * train.signs
            - params.offset * leak_integral(params.alpha, train.intervals))


def h_norm_sq(alpha, dt):
    """``||h_n||^2 = (1 - exp(-2 alpha dt)) / (2 alpha)``."""
    dt = np.asarray(dt, dtype=float)
    if np.any(dt <= 0):
        raise ValueError('interval must be positive')
    val = _decay_integral(alpha, dt)
    return val if val.ndim else float(val)


def h_fourier(t_prev, t_cur, alpha, T):
    """Fourier coefficients ``c_k(h_n)`` for ``k = -K..K``.

    Vectorized: with array arguments the result has shape ``(N, T)``.
    """
    T = check_period(T)
    t_prev = np.asarray(t_prev, dtype=float)
    t_cur = np.asarray(t_cur, dtype=float)
    dt = t_cur - t_prev
    if np.any(dt <= 0) or np.any(t_prev < 0) or np.any(t_cur > T):
        raise ValueError('need 0 <= t_prev < t_cur <= T')
    k, omega = harmonics(T)
    den = alpha - 1j * omega
    den[k == 0] = 1.0
    num = (np.exp(-1j * np.multiply.outer(t_cur, omega))
           - np.multiply.outer(np.exp(-alpha * dt), np.ones(T))
           * np.exp(-1j * np.multiply.outer(t_prev, omega)))
    c = num / den / T
    c[..., k == 0] = (leak_integral(alpha, dt) / T)[..., None]
    return c


def _mode_sums(t, alpha, T):
    """Return (dc, osc) parts of ``g``: the k = 0 mode and the sum over k != 0.

    ``g(t) = p(0) cosh(alpha t) - p(t)`` with
    ``p(t) = (1/T) sum_k exp(i w_k t) / (w_k^2 + alpha^2)``.
    """
    T = check_period(T)
    K = (T - 1) // 2
    w = 2 * np.pi * np.arange(1, K + 1) / T
    t = np.asarray(t, dtype=float)
    at = alpha * t
    with np.errstate(divide='ignore', invalid='ignore'):
        # the unused branch may be 0/0 for alpha ~ 0
        dc = np.where(np.abs(at) < 1e-4,
                      t ** 2 / 2 * (1 + at ** 2 / 12),
                      2 * np.sinh(at / 2) ** 2 / np.where(alpha > 0, alpha, 1.0) ** 2) / T
    ch = np.cosh(at)
    osc = (2 / T) * ((ch[..., None] - np.cos(np.multiply.outer(t, w))) / (w ** 2 + alpha ** 2)).sum(-1)
    return dc, osc


def g_function(t, alpha, T):
    """``g(t) = (1/alpha) int_0^t sinh(alpha (t - s)) phi(s) ds`` for the Dirichlet kernel ``phi``.

    Closed form per Fourier mode; the ``alpha -> 0`` limit is
    ``int_0^t (t - s) phi(s) ds``.
    """
    dc, osc = _mode_sums(t, alpha, T)
    val = dc + osc
    return val if np.ndim(val) else float(val)


def _g_bounded(t, alpha, T):
    # -p(t) without its DC mode; the dropped cosh and constant parts of g
    # are accounted for in closed form by the callers
    K = (check_period(T) - 1) // 2
    w = 2 * np.pi * np.arange(1, K + 1) / T
    t = np.asarray(t, dtype=float)
    return -(2 / T) * (np.cos(np.multiply.outer(t, w)) / (w ** 2 + alpha ** 2)).sum(-1)


def _shifted_expansion(g, tm, tm_prev, tn, tn_prev, alpha):
    """Shifted-kernel expansion of ``<h_m, h~_n>`` for a given function ``g``."""
    em = np.exp(-alpha * (tm - tm_prev))
    en = np.exp(-alpha * (tn - tn_prev))

    def D(s):
        return g(tm - s) - em * g(tm_prev - s)

    return en * D(tn_prev) - D(tn)


@dataclass(frozen=True, eq=False)
class KernelSystem:
    """Everything the reconstructors need about one spike train.

    Attributes
    ----------
    train : SpikeTrain
    params : LifParams
    theta : ndarray (N,)
        Sample values ``theta_n``.
    norms_sq : ndarray (N,)
        ``||h_n||^2``.
    fourier : ndarray (N, T) complex
        Coefficients of ``h~_n`` for ``k = -K..K``.
    gram : ndarray (N, N)
        ``<h_m, h~_n>``.
    """

    train: object
    params: object
    theta: np.ndarray = field(repr=False)
    norms_sq: np.ndarray = field(repr=False)
    fourier: np.ndarray = field(repr=False)
    gram: np.ndarray = field(repr=False)

    @property
    def T(self):
        return self.train.T

    @property
    def N(self):
        return self.train.N

    @property
    def alpha(self):
        return self.params.alpha

    @property
    def H(self):
        """Recursion matrix with entries ``<h_m, h~_n> / ||h_m||^2``."""
        return self.gram / self.norms_sq[:, None]

    @property
    def M(self):
        """Operator matrix: row n holds the orthonormal-basis coordinates of ``h~_n``."""
        T = self.T
        K = (T - 1) // 2
        half = self.fourier[:, K:]
        return np.hstack([np.sqrt(T) * half[:, :1].real,
                          np.sqrt(2 * T) * half[:, 1:].real,
                          -np.sqrt(2 * T) * half[:, 1:].imag])

    @property
    def offsets(self):
        """``T_n^m = t_m - t_n`` as an (N, N) array indexed [m, n]."""
        t = self.train.times
        return t[:, None] - t[None, :]

    def with_samples(self, theta):
        theta = np.asarray(theta, dtype=float)
        if theta.shape != self.theta.shape:
            raise ValueError('sample vector has wrong length')
        return replace(self, theta=theta)

    def kernel(self, n):
        """``h~_n`` as a signal."""
        return PeriodicBandlimitedSignal(self.T, self.fourier[n])


def kernel_overlap(train, alpha):
    """``<h_m, h_n>`` of the raw (not bandlimited) kernels from their support overlap.

    ``int exp(-alpha (t_m - s)) exp(-alpha (t_n - s)) ds`` over the intersection
    of ``[t_{m-1}, t_m)`` and ``[t_{n-1}, t_n)``.
    """
    t, tp = train.times, train.previous
    lo = np.maximum(tp[:, None], tp[None, :])
    hi = np.minimum(t[:, None], t[None, :])
    width = np.clip(hi - lo, 0.0, None)
    # integrand exp(-alpha (t_m + t_n - 2 s)) evaluated relative to its value at s = hi
    at_hi = np.exp(-alpha * (t[:, None] + t[None, :] - 2 * hi))
    return np.where(width > 0, at_hi * _decay_integral(alpha, width), 0.0)


def _decay_integral(alpha, width):
    """``int_0^w exp(-2 alpha s) ds``, zero for ``w = 0``."""
    w = np.asarray(width, dtype=float)
    x = alpha * w
    with np.errstate(divide='ignore', invalid='ignore'):
        exact = -np.expm1(-2 * x) / (2 * alpha) if alpha > 0 else w
    return np.where(x < SERIES_THRESHOLD, w * (1 - x), exact)


def gram_parseval(fourier, T):
    """``<h_m, h~_n> = T sum_k conj(c_k(h_m)) c_k(h_n)``."""
    return T * (np.conj(fourier) @ fourier.T).real


def gram_closed_form(train, alpha):
    """All ``<h_m, h~_n>`` from the closed-form shifted-kernel expansion.

    ``g`` splits as ``p(0) cosh(alpha t)`` (contributes exactly zero to the
    expansion), a constant ``-1/(alpha^2 T)`` (contributes
    ``l(dt_m) l(dt_n) / T``) and a bounded oscillating part evaluated here.
    """
    T = train.T
    t, tp = train.times, train.previous
    tm, tmp = t[:, None], tp[:, None]
    tn, tnp = t[None, :], tp[None, :]
    osc = _shifted_expansion(lambda s: _g_bounded(s, alpha, T), tm, tmp, tn, tnp, alpha)
    ell = leak_integral(alpha, train.intervals)
    return osc + np.outer(ell, ell) / T


def gram_entry(m, n, ks, exact_g=False):
    """``<h_m, h~_n>`` for 0-based spike indices.

    With ``exact_g`` the expansion is evaluated with :func:`g_function`
    directly.  That form loses all accuracy once ``alpha |t_m - t_n|`` is
    large (``g`` grows like ``exp(alpha |t|)``), so the default uses the
    cancellation-free split of :func:`gram_closed_form`.
    """
    t, tp = ks.train.times, ks.train.previous
    if exact_g:
        return float(_shifted_expansion(lambda s: g_function(s, ks.alpha, ks.T),
                                t[m], tp[m], t[n], tp[n], ks.alpha))
    osc = _shifted_expansion(lambda s: _g_bounded(s, ks.alpha, ks.T), t[m], tp[m], t[n], tp[n], ks.alpha)
    ell = leak_integral(ks.alpha, ks.train.intervals[[m, n]])
    return float(osc + ell[0] * ell[1] / ks.T)


def g_shifted(f, t, alpha):
    """``g_f(t) = int_0^t exp(alpha (s - t)) f(s) ds`` per Fourier mode of ``f``."""
    k, omega = harmonics(f.T)
    t = np.asarray(t, dtype=float)
    den = alpha + 1j * omega
    den[k == 0] = 1.0
    b = f.coeffs / den
    b[k == 0] = 0.0
    osc = np.exp(1j * np.multiply.outer(t, omega)) @ b - np.exp(-alpha * t) * b.sum()
    val = osc.real + f.coeffs[f.K].real * leak_integral(alpha, t)
    return val if np.ndim(val) else float(val)


def inner_h_shifted(m, f, shift, ks):
    """``<h_m, f(. - shift)>`` via ``g_f(T_n^m) - exp(-alpha dt_m) g_f(T_n^{m-1})``.

    The ``exp(-alpha t)`` terms of ``g_f`` cancel between the two
    evaluations and are dropped before summing.
    """
    alpha = ks.alpha
    k, omega = harmonics(f.T)
    tm = ks.train.times[m]
    dtm = ks.train.intervals[m]
    den = alpha + 1j * omega
    den[k == 0] = 1.0
    mode = np.exp(1j * omega * (tm - shift)) * (1 - np.exp(-alpha * dtm) * np.exp(-1j * omega * dtm)) / den
    mode[k == 0] = leak_integral(alpha, dtm)
    return float((f.coeffs @ mode).real)


def apply_H(ks, u):
    """Sampling operator: ``(<h_n, u>)_n`` for an in-band ``u``."""
    return ks.T * (np.conj(ks.fourier) @ u.coeffs).real


def kernel_signal(ks, weights):
    """``sum_n weights_n h~_n``."""
    return PeriodicBandlimitedSignal(ks.T, np.asarray(weights, dtype=float) @ ks.fourier)


def build_system(train, params, gram_method='closed_form'):
    """Assemble the :class:`KernelSystem` of a spike train.

    ``gram_method`` selects the closed-form expansion (``'closed_form'``) or
    the Fourier-coefficient route (``'parseval'``) for the Gram matrix.
    """
    if train.N == 0:
        raise ValueError('degenerate spike train (N = 0)')
    fourier = h_fourier(train.previous, train.times, params.alpha, train.T)
    if gram_method == 'closed_form':
        gram = gram_closed_form(train, params.alpha)
    elif gram_method == 'parseval':
        gram = gram_parseval(fourier, train.T)
    else:
        raise ValueError('unknown gram_method %r' % gram_method)
    ks = KernelSystem(train, params, sample_values(train, params),
                      h_norm_sq(params.alpha, train.intervals), fourier, gram)
    if not (np.all(np.isfinite(ks.gram)) and np.all(np.isfinite(ks.fourier))):
        raise FloatingPointError('non-finite kernel system')
    return ks


def matrix_to_csv(a):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator='\n')
    for row in np.atleast_2d(a):
        w.writerow([repr(float(v)) for v in row])
    return buf.getvalue()
