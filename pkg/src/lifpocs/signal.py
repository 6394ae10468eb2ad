"""Periodic bandlimited signals with unit Nyquist period.

A signal of period ``T`` (odd integer) is stored by its Fourier
coefficients ``c_k`` for ``k = -K..K`` with ``K = (T - 1) / 2``, so that

    u(t) = sum_k c_k exp(i 2 pi k t / T).

Bandlimitation is structural: there is no slot for out-of-band
coefficients.  All times are in Nyquist periods.
"""

from dataclasses import dataclass, field

import numpy as np

__all__ = ['PeriodicBandlimitedSignal', 'TimeGrid', 'check_period',
           'harmonics', 'dirichlet_eval', 'evaluate', 'inner_product',
           'leaky_antiderivative', 'leaky_response', 'random_bandlimited',
           'mse_db', 'to_db', 'DB_FLOOR', 'DB_CEIL', 'SERIES_THRESHOLD']

DB_FLOOR = -200.0
# diverging iterations are reported at this level instead of inf
DB_CEIL = 400.0

# Below this value of alpha*dt, 1 - exp(-alpha*dt) is replaced by its series.
SERIES_THRESHOLD = 1e-6


def check_period(T):
    """Return ``T`` as an int, raising ValueError unless it is a positive odd integer."""
    if isinstance(T, (bool, np.bool_)) or int(T) != T or T <= 0 or int(T) % 2 == 0:
        raise ValueError('period T must be a positive odd integer, got %r' % (T,))
    return int(T)


def harmonics(T):
    """Harmonic indices ``k = -K..K`` and angular frequencies ``2 pi k / T``."""
    T = check_period(T)
    K = (T - 1) // 2
    k = np.arange(-K, K + 1)
    return k, 2 * np.pi * k / T


def leak_integral(alpha, dt):
    """``int_0^dt exp(-alpha s) ds``, i.e. ``(1 - exp(-alpha dt)) / alpha``.

    Uses the series ``dt (1 - alpha dt / 2)`` when ``alpha dt`` is tiny,
    which also covers ``alpha = 0``.
    """
    dt = np.asarray(dt, dtype=float)
    x = alpha * dt
    with np.errstate(divide='ignore', invalid='ignore'):
        exact = -np.expm1(-x) / alpha if alpha > 0 else dt
    return np.where(np.abs(x) < SERIES_THRESHOLD, dt * (1 - x / 2), exact)


@dataclass(frozen=True, eq=False)
class PeriodicBandlimitedSignal:
    """Real T-periodic signal with baseband ``[-pi, pi]``.

    Parameters
    ----------
    T : int
        Period in Nyquist periods (odd).
    coeffs : array_like of complex, shape (T,)
        Fourier coefficients for ``k = -K..K``.  Hermitian symmetry is
        enforced on construction by averaging ``c_k`` and ``conj(c_{-k})``.
    """

    T: int
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        T = check_period(self.T)
        c = np.array(self.coeffs, dtype=complex)
        if c.shape != (T,):
            raise ValueError('expected %d coefficients, got shape %s' % (T, c.shape))
        c = 0.5 * (c + np.conj(c[::-1]))
        c.setflags(write=False)
        object.__setattr__(self, 'T', T)
        object.__setattr__(self, 'coeffs', c)

    @property
    def K(self):
        return (self.T - 1) // 2

    @classmethod
    def zeros(cls, T):
        return cls(T, np.zeros(check_period(T), dtype=complex))

    @classmethod
    def constant(cls, T, value):
        c = np.zeros(check_period(T), dtype=complex)
        c[(T - 1) // 2] = value
        return cls(T, c)

    @classmethod
    def from_samples(cls, samples):
        """Dirichlet interpolant of the Nyquist samples ``s_0 .. s_{T-1}``."""
        s = np.asarray(samples, dtype=float)
        return cls(len(s), np.fft.fftshift(np.fft.fft(s)) / len(s))

    @classmethod
    def from_basis(cls, coords):
        """Build from coordinates in the real orthonormal basis.

        The basis is ``1/sqrt(T)``, ``sqrt(2/T) cos(w_k t)``,
        ``sqrt(2/T) sin(w_k t)`` for ``k = 1..K``, laid out as
        ``[a_0, a_1..a_K, b_1..b_K]``.
        """
        a = np.asarray(coords, dtype=float)
        T = check_period(len(a))
        K = (T - 1) // 2
        half = np.empty(K + 1, dtype=complex)
        half[0] = a[0] / np.sqrt(T)
        half[1:] = (a[1:K + 1] - 1j * a[K + 1:]) / np.sqrt(2 * T)
        return cls(T, np.concatenate([np.conj(half[:0:-1]), half]))

    def basis_coords(self):
        """Coordinates in the real orthonormal basis (see :meth:`from_basis`)."""
        half = self.coeffs[self.K:]
        return np.concatenate([[np.sqrt(self.T) * half[0].real],
                               np.sqrt(2 * self.T) * half[1:].real,
                               -np.sqrt(2 * self.T) * half[1:].imag])

    def samples(self):
        """Nyquist-rate samples ``u(0) .. u(T-1)``."""
        return np.fft.ifft(np.fft.ifftshift(self.coeffs)).real * self.T

    def __call__(self, t):
        return evaluate(self, t)

    def _same(self, other):
        if not isinstance(other, PeriodicBandlimitedSignal):
            return NotImplemented
        if other.T != self.T:
            raise ValueError('period mismatch: %d vs %d' % (self.T, other.T))
        return other

    def __add__(self, other):
        if np.isscalar(other):
            return self + PeriodicBandlimitedSignal.constant(self.T, other)
        other = self._same(other)
        if other is NotImplemented:
            return other
        return PeriodicBandlimitedSignal(self.T, self.coeffs + other.coeffs)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-1) * other

    def __rsub__(self, other):
        return (-1) * self + other

    def __mul__(self, a):
        if not np.isscalar(a):
            return NotImplemented
        return PeriodicBandlimitedSignal(self.T, self.coeffs * float(a))

    __rmul__ = __mul__

    def __neg__(self):
        return (-1) * self

    def norm_sq(self):
        return inner_product(self, self)

    def norm(self):
        return np.sqrt(self.norm_sq())

    def to_dict(self):
        half = self.coeffs[self.K:]
        return {'T': self.T, 'coeffs': [[float(z.real), float(z.imag)] for z in half]}

    @classmethod
    def from_dict(cls, d):
        T = check_period(d['T'])
        half = np.array([complex(re, im) for re, im in d['coeffs']])
        if len(half) != (T + 1) // 2:
            raise ValueError('expected %d coefficient pairs' % ((T + 1) // 2))
        return cls(T, np.concatenate([np.conj(half[:0:-1]), half]))


@dataclass(frozen=True)
class TimeGrid:
    """Uniform search grid over one period, ``per_period`` points per Nyquist period."""

    T: int
    per_period: int = 64

    def __post_init__(self):
        object.__setattr__(self, 'T', check_period(self.T))
        if int(self.per_period) != self.per_period or self.per_period < 1:
            raise ValueError('per_period must be a positive integer')

    @property
    def step(self):
        return 1.0 / self.per_period

    @property
    def instants(self):
        return np.arange(self.T * self.per_period) / self.per_period


def dirichlet_eval(t, T):
    """Periodic sinc ``sin(pi t) / (T sin(pi t / T))``, equal to 1 at multiples of T."""
    T = check_period(T)
    t = np.asarray(t, dtype=float)
    den = T * np.sin(np.pi * t / T)
    near = np.abs(np.remainder(t + T / 2, T) - T / 2) < 1e-12
    with np.errstate(divide='ignore', invalid='ignore'):
        val = np.where(near, 1.0, np.sin(np.pi * t) / den)
    return val if val.ndim else float(val)


def _synth(coeffs, t, omega):
    t = np.asarray(t, dtype=float)
    return np.exp(1j * np.multiply.outer(t, omega)) @ coeffs


def evaluate(sig, t):
    """Value of ``sig`` at time(s) ``t`` (real part of the Fourier synthesis)."""
    _, omega = harmonics(sig.T)
    val = _synth(sig.coeffs, t, omega).real
    return val if np.ndim(val) else float(val)


def inner_product(u, v):
    """``int_0^T u(t) v(t) dt`` computed by Parseval."""
    if u.T != v.T:
        raise ValueError('period mismatch: %d vs %d' % (u.T, v.T))
    return float(u.T * np.vdot(u.coeffs, v.coeffs).real)


def leaky_response(T, alpha):
    """Per-mode factor ``1 / (alpha + i w_k)`` with the DC slot set to 0.

    The DC mode is handled separately by callers through
    :func:`leak_integral` so that ``alpha = 0`` stays finite.
    """
    k, omega = harmonics(T)
    den = alpha + 1j * omega
    den[k == 0] = 1.0
    r = 1.0 / den
    r[k == 0] = 0.0
    return r


def leaky_antiderivative(sig, c, tau, t, alpha):
    """``A_tau (sig + c)(t) = int_tau^t exp(-alpha (t - s)) (sig(s) + c) ds``.

    Closed form per Fourier mode; ``t`` may be an array.
    """
    if alpha < 0:
        raise ValueError('alpha must be >= 0')
    t = np.asarray(t, dtype=float)
    if np.any(t < tau):
        raise ValueError('t must be >= tau')
    _, omega = harmonics(sig.T)
    b = sig.coeffs * leaky_response(sig.T, alpha)
    decay = np.exp(-alpha * (t - tau))
    osc = (_synth(b, t, omega) - decay * (np.exp(1j * omega * tau) @ b)).real
    dc = (sig.coeffs[sig.K].real + c) * leak_integral(alpha, t - tau)
    val = osc + dc
    return val if val.ndim else float(val)


def random_bandlimited(T, amp=0.7, seed=None):
    """Dirichlet interpolant of ``T`` i.i.d. Nyquist samples uniform in ``[-amp, amp]``.

    ``seed`` may be an int, a SeedSequence or a numpy Generator.
    """
    T = check_period(T)
    if amp <= 0:
        raise ValueError('amp must be positive')
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return PeriodicBandlimitedSignal.from_samples(rng.uniform(-amp, amp, T))


def to_db(ratio):
    """``10 log10(ratio)`` clipped to ``[DB_FLOOR, DB_CEIL]``; overflow maps to the ceiling."""
    ratio = np.asarray(ratio, dtype=float)
    ratio = np.where(np.isnan(ratio), np.inf, ratio)
    with np.errstate(divide='ignore'):
        val = np.clip(10 * np.log10(np.maximum(ratio, 0.0)), DB_FLOOR, DB_CEIL)
    return val if val.ndim else float(val)


def mse_db(u, x, ref_power):
    """Squared error ``||u - x||^2`` in dB relative to ``ref_power``."""
    if ref_power <= 0:
        raise ValueError('ref_power must be positive')
    return to_db((u - x).norm_sq() / ref_power)
