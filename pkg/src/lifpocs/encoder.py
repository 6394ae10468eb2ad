"""Leaky integrate-and-fire encoding of periodic bandlimited signals.

Starting from ``t_0 = 0``, each firing instant is the first time the leaky
running integral ``A_{t_{n-1}}(x + c)(t)`` reaches ``+theta`` or ``-theta``.
Crossings are bracketed on a uniform grid and refined with a bracketing
root finder.  Encoding covers one period; there is no wrap-around spike.
"""

import csv
import io
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .signal import (SERIES_THRESHOLD, TimeGrid, check_period, harmonics, leak_integral,
                     leaky_response)

__all__ = ['LifParams', 'SpikeTrain', 'encode', 'calibrate_threshold',
           'quantize_times', 'ensemble_rate', 'CalibrationError']

MODES = ('unipolar', 'bipolar')
CROSSING_XTOL = 1e-13


class CalibrationError(RuntimeError):
    pass


@dataclass(frozen=True)
class LifParams:
    """Encoder constants: leakage ``alpha``, offset ``c``, threshold ``theta``."""

    alpha: float
    offset: float
    threshold: float
    mode: str = 'bipolar'

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError('alpha must be >= 0')
        if self.offset < 0:
            raise ValueError('offset c must be >= 0')
        if not self.threshold > 0:
            raise ValueError('threshold must be > 0')
        if self.mode not in MODES:
            raise ValueError('mode must be one of %s' % (MODES,))

    def with_threshold(self, theta):
        return LifParams(self.alpha, self.offset, theta, self.mode)

    def to_dict(self):
        return {'alpha': self.alpha, 'offset': self.offset,
                'threshold': self.threshold, 'mode': self.mode}


@dataclass(frozen=True, eq=False)
class SpikeTrain:
    """Firing instants ``t_1 < ... < t_N`` in ``(0, T]`` with signs ``+-1``."""

    T: int
    times: np.ndarray = field(repr=False)
    signs: np.ndarray = field(repr=False)

    def __post_init__(self):
        T = check_period(self.T)
        t = np.array(self.times, dtype=float).reshape(-1)
        s = np.array(self.signs, dtype=int).reshape(-1)
        if t.shape != s.shape:
            raise ValueError('times and signs differ in length')
        if len(t) and (t[0] <= 0 or np.any(np.diff(t) <= 0)):
            raise ValueError('times must be strictly increasing and positive')
        if not np.all(np.isin(s, (-1, 1))):
            raise ValueError('signs must be +1 or -1')
        t.setflags(write=False)
        s.setflags(write=False)
        object.__setattr__(self, 'T', T)
        object.__setattr__(self, 'times', t)
        object.__setattr__(self, 'signs', s)

    def __len__(self):
        return len(self.times)

    @property
    def N(self):
        return len(self.times)

    @property
    def previous(self):
        """``t_{n-1}`` for each spike, with ``t_0 = 0``."""
        return np.concatenate([[0.0], self.times[:-1]])

    @property
    def intervals(self):
        return self.times - self.previous

    @property
    def rate(self):
        """Oversampling ratio ``N / T``."""
        return self.N / self.T

    def to_dict(self):
        return {'T': self.T, 'times': self.times.tolist(), 'signs': self.signs.tolist()}

    @classmethod
    def from_dict(cls, d):
        return cls(d['T'], d['times'], d['signs'])

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator='\n')
        w.writerow(['time', 'sign'])
        for t, s in zip(self.times, self.signs):
            w.writerow([repr(float(t)), int(s)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text, T):
        rows = list(csv.DictReader(io.StringIO(text)))
        return cls(T, [float(r['time']) for r in rows], [int(r['sign']) for r in rows])


class _Integrator:
    """Evaluates ``A_tau(x + c)(t)`` quickly for a fixed input.

    Writes ``A_tau x^c(t) = F(t) - exp(-alpha (t - tau)) F(tau) + dc * l(t - tau)``
    where ``F`` collects the non-DC modes of the periodic leaky response.
    """

    def __init__(self, x, params, grid):
        self.alpha = params.alpha
        _, self.omega = harmonics(x.T)
        self.b = x.coeffs * leaky_response(x.T, params.alpha)
        self.dc = x.coeffs[x.K].real + params.offset
        # F on the grid by inverse FFT of the zero-padded spectrum
        n = x.T * grid.per_period
        spec = np.zeros(n, dtype=complex)
        k = np.arange(-x.K, x.K + 1)
        spec[k % n] = self.b
        F = np.fft.ifft(spec).real * n
        self.t_grid = np.append(grid.instants, float(x.T))
        self.F_grid = np.append(F, F[0])
        self.b_pos = 2 * self.b[x.K + 1:]
        self.omega_pos = self.omega[x.K + 1:]

    def F(self, t):
        return (np.exp(1j * self.omega_pos * t) @ self.b_pos).real

    def value(self, tau, F_tau, t):
        d = t - tau
        x = self.alpha * d
        ell = d * (1 - x / 2) if abs(x) < SERIES_THRESHOLD else -math.expm1(-x) / self.alpha
        return self.F(t) - math.exp(-x) * F_tau + self.dc * ell

    def window(self, tau, F_tau, lo, hi):
        d = self.t_grid[lo:hi] - tau
        return self.F_grid[lo:hi] - np.exp(-self.alpha * d) * F_tau + self.dc * leak_integral(self.alpha, d)


def _encode(x, params, grid, max_spikes=None):
    """Core loop; returns (times, signs, truncated)."""
    integ = _Integrator(x, params, grid)
    tg = integ.t_grid
    theta = params.threshold
    width = 4 * grid.per_period
    times, signs = [], []
    tau = 0.0
    start = 1
    while True:
        F_tau = integ.F(tau)
        lo = start
        hit = None
        while lo < len(tg):
            hi = min(lo + width, len(tg))
            y = integ.window(tau, F_tau, lo, hi)
            over = np.nonzero(np.abs(y) >= theta)[0]
            if len(over):
                hit = lo + over[0]
                break
            lo = hi
        if hit is None:
            break
        level = theta if integ.value(tau, F_tau, tg[hit]) > 0 else -theta
        a = tau if hit == start else tg[hit - 1]
        b = tg[hit]
        fa = integ.value(tau, F_tau, a) - level
        fb = integ.value(tau, F_tau, b) - level
        if fb == 0 or fa * fb > 0:
            # grid and direct evaluation disagree only by rounding: touching at b
            t_n = b
        elif fa == 0:
            t_n = a
        else:
            t_n = brentq(lambda t: integ.value(tau, F_tau, t) - level, a, b,
                         xtol=CROSSING_XTOL, rtol=4 * np.finfo(float).eps)
        if t_n <= tau:
            t_n = np.nextafter(tau, np.inf)
        times.append(t_n)
        signs.append(1 if level > 0 else -1)
        if max_spikes is not None and len(times) > max_spikes:
            return np.array(times), np.array(signs), True
        tau = t_n
        start = int(np.searchsorted(tg, tau, side='right'))
        if start >= len(tg):
            break
    return np.array(times), np.array(signs, dtype=int), False


def encode(x, params, grid=None):
    """Encode one period of ``x`` with an LIF sampler.

    Parameters
    ----------
    x : PeriodicBandlimitedSignal
        Input signal.
    params : LifParams
        Encoder constants.
    grid : TimeGrid, optional
        Crossing search grid; defaults to 64 points per Nyquist period.

    Returns
    -------
    SpikeTrain
        The firing instants and signs.  An empty train is returned (with a
        RuntimeWarning) when the threshold is never reached.

    Raises
    ------
    ValueError
        In unipolar mode, when ``x + c`` is not positive on the grid.
    """
    grid = grid or TimeGrid(x.T)
    if grid.T != x.T:
        raise ValueError('grid period does not match signal')
    if params.mode == 'unipolar':
        lowest = np.min(x(grid.instants)) + params.offset
        if lowest <= 0:
            raise ValueError('unipolar mode requires x + c > 0 (min %.3g)' % lowest)
    times, signs, _ = _encode(x, params, grid)
    if params.mode == 'unipolar':
        signs = np.ones_like(signs)
    if len(times) == 0:
        warnings.warn('threshold %.3g never reached: empty spike train' % params.threshold,
                      RuntimeWarning, stacklevel=2)
    return SpikeTrain(x.T, times, signs)


def ensemble_rate(inputs, params, grid=None, above=None):
    """Average spikes per Nyquist period over ``inputs``.

    If ``above`` is given, stops early and returns ``inf`` as soon as the
    average is certain to exceed it.
    """
    T = inputs[0].T
    grid = grid or TimeGrid(T)
    total = 0
    budget = None if above is None else int(np.floor(above * T * len(inputs)))
    for x in inputs:
        cap = None if budget is None else budget - total
        times, _, truncated = _encode(x, params, grid, max_spikes=cap)
        total += len(times)
        if truncated or (budget is not None and total > budget):
            return np.inf
    return total / (T * len(inputs))


def calibrate_threshold(inputs, params, target, tol=0.02, bracket=(1e-6, 1e3), grid=None,
                        max_iter=200):
    """Find a threshold giving an ensemble firing rate within ``tol`` of ``target``.

    Bisection on ``log(theta)``; the spike count is non-increasing in theta.
    """
    if not target > 0:
        raise ValueError('target rate must be positive')
    if not len(inputs):
        raise ValueError('need at least one input')
    upper = target * (1 + tol)
    lower = target * (1 - tol)

    def rate(theta):
        return ensemble_rate(inputs, params.with_threshold(theta), grid, above=upper)

    lo, hi = bracket
    r_lo, r_hi = rate(lo), rate(hi)
    if not (r_lo >= lower and r_hi <= upper):
        raise CalibrationError('target rate %.3g unreachable: rates %.3g..%.3g over theta in [%g, %g]'
                               % (target, r_hi, r_lo, lo, hi))
    for r, th in ((r_lo, lo), (r_hi, hi)):
        if lower <= r <= upper:
            return th
    for _ in range(max_iter):
        mid = np.sqrt(lo * hi)
        r = rate(mid)
        if lower <= r <= upper:
            return float(mid)
        if r > target:
            lo = mid
        else:
            hi = mid
    raise CalibrationError('no threshold within tolerance for rate %.3g (bracket [%g, %g])'
                           % (target, lo, hi))


def quantize_times(train, bits):
    """Round firing instants to multiples of ``2**-bits``, keeping strict increase.

    A spike that lands on or before its predecessor is pushed up one quantum.
    """
    if bits < 1:
        raise ValueError('bits must be >= 1')
    q = 2.0 ** -bits
    out = np.empty(len(train))
    prev = 0.0
    for i, t in enumerate(train.times):
        v = np.round(t / q) * q
        if v <= prev:
            v = prev + q
        out[i] = prev = v
    return SpikeTrain(train.T, out, train.signs)
