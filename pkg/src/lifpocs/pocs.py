"""POCS reconstruction: projections, the discretized iteration and the pseudo-inverse.

The bandlimited consistent projection of an in-band ``u`` is

    P u = u + sum_n (theta_n - <h_n, u>) / ||h_n||^2  h~_n.

Started from zero, its iterates are ``sum_n c_n h~_n`` with coefficients
driven by the N x N recursion

    r <- r - H r,   c <- c + r,   r(0) = theta / ||h||^2,  c(0) = 0,

so the continuous-time signal is only synthesized when needed.
"""

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .kernels import apply_H, kernel_overlap, kernel_signal
from .signal import PeriodicBandlimitedSignal, to_db

__all__ = ['PocsState', 'NoisySampleModel', 'project_consistent', 'consistent_weights',
           'measure_consistent', 'pocs_run',
           'pocs_run_from', 'pocs_iterates', 'yeh_stark_sweep', 'pseudo_inverse',
           'project_range', 'weighted_norm', 'error_trace', 'mse_trace', 'trace_to_csv',
           'SVD_RCOND']

SVD_RCOND = 1e-10


@dataclass(eq=False)
class PocsState:
    """Residual and coefficient vectors of the discretized iteration."""

    ks: object = field(repr=False)
    r: np.ndarray = field(repr=False)
    c: np.ndarray = field(repr=False)
    k: int = 0

    @classmethod
    def start(cls, ks):
        return cls(ks, ks.theta / ks.norms_sq, np.zeros(ks.N), 0)

    def step(self, count=1):
        H = self.ks.H
        for _ in range(count):
            self.c = self.c + self.r
            self.r = self.r - H @ self.r
            self.k += 1
        return self

    def residual_norm(self):
        """``||theta - H z^(k)||_N`` in the weighted sample norm."""
        return float(np.sqrt(np.sum(self.r ** 2 * self.ks.norms_sq)))

    def signal(self):
        return kernel_signal(self.ks, self.c)

    def to_dict(self):
        return {'k': self.k, 'r': self.r.tolist(), 'c': self.c.tolist(),
                'theta': self.ks.theta.tolist(),
                'train': self.ks.train.to_dict(), 'params': self.ks.params.to_dict()}

    @classmethod
    def from_dict(cls, d, ks=None):
        """Restore a checkpoint; rebuilds the kernel system unless ``ks`` is given."""
        if ks is None:
            from .encoder import LifParams, SpikeTrain
            from .kernels import build_system
            ks = build_system(SpikeTrain.from_dict(d['train']), LifParams(**d['params']))
            ks = ks.with_samples(d['theta'])
        return cls(ks, np.array(d['r'], dtype=float), np.array(d['c'], dtype=float), int(d['k']))


@dataclass(frozen=True, eq=False)
class NoisySampleModel:
    """Observed samples ``theta`` and, in synthetic tests, the clean ``theta0``."""

    observed: np.ndarray
    clean: np.ndarray = None

    def __post_init__(self):
        if self.clean is not None and np.shape(self.clean) != np.shape(self.observed):
            raise ValueError('clean and observed sample vectors differ in length')

    @property
    def deviation(self):
        """``e = theta - theta0``."""
        if self.clean is None:
            raise ValueError('clean samples unknown')
        return np.asarray(self.observed) - np.asarray(self.clean)


def weighted_norm(ks, v):
    """``||v||_N`` with weights ``1 / ||h_n||^2``."""
    return float(np.sqrt(np.sum(np.asarray(v) ** 2 / ks.norms_sq)))


def consistent_weights(u, ks):
    """Weights ``w_n`` of the consistent projection ``P_C u = u + sum_n w_n h_n``."""
    return (ks.theta - apply_H(ks, u)) / ks.norms_sq


def measure_consistent(u, ks):
    """``<h_m, P_C u>`` for the raw (not bandlimited) consistent projection of ``u``."""
    return apply_H(ks, u) + kernel_overlap(ks.train, ks.alpha) @ consistent_weights(u, ks)


def project_consistent(u, ks):
    """One POCS step: project onto the consistent set, then bandlimit."""
    return u + kernel_signal(ks, consistent_weights(u, ks))


def pocs_iterates(ks, iterations):
    """Yield the coefficient vectors ``c^(k)`` for ``k = 0..iterations``."""
    state = PocsState.start(ks)
    yield state.c
    for _ in range(iterations):
        state.step()
        yield state.c


def pocs_run(ks, iterations, tol=None):
    """Run the discretized iteration from zero.

    Stops after ``iterations`` steps, or earlier once the weighted residual
    norm drops below ``tol``.  Returns the final state and its signal.
    """
    if iterations < 0:
        raise ValueError('iterations must be >= 0')
    state = PocsState.start(ks)
    while state.k < iterations:
        if tol is not None and state.residual_norm() < tol:
            break
        state.step()
    return state, state.signal()


def pocs_run_from(u, ks, iterations):
    """POCS iterates from a nonzero start, via a zero-start run on ``theta - H u``."""
    shifted = ks.with_samples(ks.theta - apply_H(ks, u))
    _, z = pocs_run(shifted, iterations)
    return u + z


def yeh_stark_sweep(u, ks):
    """One sequential sweep of elementary projections onto each bandlimited constraint."""
    F = ks.fourier
    norms = np.diag(ks.gram)
    coeffs = np.array(u.coeffs)
    for n in range(ks.N):
        val = ks.T * np.vdot(F[n], coeffs).real
        coeffs = coeffs + ((ks.theta[n] - val) / norms[n]) * F[n]
    return PeriodicBandlimitedSignal(u.T, coeffs)


def _normalized_svd(ks):
    scale = np.sqrt(ks.norms_sq)
    U, s, Vt = np.linalg.svd(ks.M / scale[:, None], full_matrices=False)
    rank = int(np.sum(s > SVD_RCOND * s[0])) if len(s) else 0
    return scale, U[:, :rank], s[:rank], Vt[:rank]


def pseudo_inverse(ks, theta=None):
    """Minimal-norm least-squares reconstruction (SVD oracle).

    Solves with the normalized kernels ``h_n / ||h_n||`` so that the
    least-squares fit is taken in the weighted sample norm.
    """
    theta = ks.theta if theta is None else np.asarray(theta, dtype=float)
    scale, U, s, Vt = _normalized_svd(ks)
    coords = Vt.T @ ((U.T @ (theta / scale)) / s)
    return PeriodicBandlimitedSignal.from_basis(coords)


def project_range(ks, theta):
    """Orthogonal projection of ``theta`` onto ``ran(H)`` in the weighted norm."""
    theta = np.asarray(theta, dtype=float)
    scale, U, _, _ = _normalized_svd(ks)
    return scale * (U @ (U.T @ (theta / scale)))


def error_trace(ks, x, iterations, start=None):
    """Squared errors ``||u_k - x||^2`` of the POCS iterates, ``k = 0..iterations``.

    Kept linear so that ensemble members can be summed before converting to dB.
    """
    base = PeriodicBandlimitedSignal.zeros(ks.T) if start is None else start
    if start is not None:
        ks = ks.with_samples(ks.theta - apply_H(ks, start))
    err0 = (base - x).coeffs
    out = []
    for c in pocs_iterates(ks, iterations):
        e = err0 + c @ ks.fourier
        out.append(ks.T * np.vdot(e, e).real)
    return np.array(out)


def mse_trace(ks, x, iterations, start=None, ref_power=None):
    """MSE in dB of the POCS iterates against ``x``, for ``k = 0..iterations``."""
    ref = x.norm_sq() if ref_power is None else ref_power
    return to_db(error_trace(ks, x, iterations, start) / ref)


def trace_to_csv(trace, arm=None):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator='\n')
    w.writerow(['k', 'mse_db'] if arm is None else ['arm', 'k', 'mse_db'])
    for k, v in enumerate(trace):
        w.writerow([k, repr(float(v))] if arm is None else [arm, k, repr(float(v))])
    return buf.getvalue()
