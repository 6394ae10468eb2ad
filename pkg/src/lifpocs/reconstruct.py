"""One-step estimates and Lazar's iteration.

The one-step estimates (naive, Feichtinger-style, Wiener) estimate
``x + c``; subtract the offset to compare with ``x``.  Lazar's iteration
works on the sample values ``theta_n`` and estimates ``x`` directly.
"""

from dataclasses import dataclass, field

import numpy as np

from .kernels import apply_H
from .signal import PeriodicBandlimitedSignal, check_period, harmonics

__all__ = ['WienerFilter', 'spike_spectrum', 'naive_estimate', 'feichtinger_estimate',
           'wiener_fit', 'wiener_apply', 'lazar_iterate', 'lazar_midpoints']


def spike_spectrum(train):
    """``S(w_k) = sum_n eps_n exp(-i w_k t_n)`` for ``k = -K..K``."""
    _, omega = harmonics(train.T)
    return np.exp(-1j * np.multiply.outer(omega, train.times)) @ train.signs


def naive_estimate(train, theta):
    """``sum_n eps_n theta phi(t - t_n)``: the bandlimited spike train."""
    return PeriodicBandlimitedSignal(train.T, theta * spike_spectrum(train) / train.T)


def feichtinger_estimate(train, theta, alpha):
    """Estimate obtained by Nyquist-rate resampling of the leaky-integrated spike train.

    The leaky integral of ``sum eps_n theta delta(t - t_n)`` is taken in its
    periodic steady state, sampled at the integers, interpolated with the
    Dirichlet kernel and mapped back through ``psi = phi' + alpha phi``.
    """
    if not alpha > 0:
        raise ValueError('alpha must be > 0 for the periodic leaky integral to exist')
    T = train.T
    k, omega = harmonics(T)
    A = leaky_samples(train, theta, alpha)
    spec = np.exp(-1j * np.multiply.outer(omega, np.arange(T))) @ A
    return PeriodicBandlimitedSignal(T, (1j * omega + alpha) * spec / T)


def leaky_samples(train, theta, alpha):
    """Periodic steady state of ``int_-inf^t exp(-alpha (t - s)) u_0(s) ds`` at ``t = 0..T-1``.

    Spikes are counted from the right, so a spike at an integer is included.
    """
    T = train.T
    lag = np.remainder(np.arange(T)[:, None] - train.times[None, :], T)
    w = np.exp(-alpha * lag) / -np.expm1(-alpha * T)
    return theta * (w @ train.signs)


@dataclass(frozen=True, eq=False)
class WienerFilter:
    """In-band frequency response ``F(w_k)`` for ``k = -K..K``."""

    T: int
    response: np.ndarray = field(repr=False)
    ensemble_size: int = 0
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        T = check_period(self.T)
        r = np.array(self.response, dtype=complex)
        if r.shape != (T,):
            raise ValueError('response must have %d entries' % T)
        r = 0.5 * (r + np.conj(r[::-1]))
        r.setflags(write=False)
        object.__setattr__(self, 'T', T)
        object.__setattr__(self, 'response', r)

    def to_dict(self):
        K = (self.T - 1) // 2
        return {'T': self.T, 'ensemble_size': self.ensemble_size, 'params': self.params,
                'response': {str(k): [float(z.real), float(z.imag)]
                             for k, z in zip(range(K + 1), self.response[K:])}}

    @classmethod
    def from_dict(cls, d):
        T = check_period(d['T'])
        K = (T - 1) // 2
        half = np.array([complex(*d['response'][str(k)]) for k in range(K + 1)])
        return cls(T, np.concatenate([np.conj(half[:0:-1]), half]),
                   d.get('ensemble_size', 0), d.get('params', {}))


def wiener_fit(pairs, params=None):
    """Least-squares convolution filter from (input, spike train) pairs.

    ``F(w_k) = sum conj(S(w_k)) X^c(w_k) / sum |S(w_k)|^2`` with
    ``X^c = T c_k(x + c)``.  Harmonics with no spike energy get zero
    response.
    """
    if not pairs:
        raise ValueError('empty ensemble')
    T = pairs[0][0].T
    c = 0.0 if params is None else params.offset
    num = np.zeros(T, dtype=complex)
    den = np.zeros(T)
    for x, train in pairs:
        if x.T != T or train.T != T:
            raise ValueError('all periods must be equal')
        S = spike_spectrum(train)
        X = T * (x + c).coeffs
        num += np.conj(S) * X
        den += np.abs(S) ** 2
    with np.errstate(divide='ignore', invalid='ignore'):
        F = np.where(den > 0, num / np.where(den > 0, den, 1.0), 0.0)
    return WienerFilter(T, F, len(pairs), {} if params is None else params.to_dict())


def wiener_apply(filt, train):
    """``sum_n eps_n f(t - t_n)``, computed as ``F(w_k) S(w_k) / T`` per mode."""
    if filt.T != train.T:
        raise ValueError('period mismatch')
    return PeriodicBandlimitedSignal(train.T, filt.response * spike_spectrum(train) / train.T)


def lazar_midpoints(train):
    return 0.5 * (train.previous + train.times)


def lazar_iterate(train, ks, u):
    """One step of ``L u = u + sum_n (theta_n - <h_n, u>) phi(t - tau_n)``."""
    _, omega = harmonics(train.T)
    err = ks.theta - apply_H(ks, u)
    corr = np.exp(-1j * np.multiply.outer(omega, lazar_midpoints(train))) @ err / train.T
    return PeriodicBandlimitedSignal(train.T, u.coeffs + corr)
