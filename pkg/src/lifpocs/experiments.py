"""Seeded Monte Carlo experiments: one-step estimates, iterative methods, time quantization.

Every experiment draws its inputs from named sub-streams of one seed, so
identical configurations give identical records.  Ensemble members are
independent and may be processed by a process pool
(``LIFPOCS_WORKERS`` > 1); results are always merged in member order.
"""

import csv
import io
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from . import __version__
from .encoder import CalibrationError, LifParams, calibrate_threshold, encode, quantize_times
from .kernels import build_system
from .pocs import error_trace, pseudo_inverse
from .reconstruct import (feichtinger_estimate, lazar_iterate, naive_estimate, wiener_apply,
                          wiener_fit)
from .signal import PeriodicBandlimitedSignal, TimeGrid, check_period, random_bandlimited, to_db

__all__ = ['ExperimentConfig', 'ExperimentRecord', 'run_fig1', 'run_figiter', 'run_quant',
           'run_experiment', 'draw_inputs', 'lif_params']

EXPERIMENTS = ('fig1', 'figiter', 'quant')
OFFSETS = {'unipolar': 1.0, 'bipolar': 0.0}
STREAMS = {'eval': 0, 'train': 1}

DEFAULT_ALPHAS = {'fig1': (0.03, 0.5, 1.0, 1.5, 2.0),
                  'figiter': (0.03, 1.5),
                  'quant': (0.03,)}
DEFAULT_ITERATIONS = {'fig1': 0, 'figiter': 300, 'quant': 1000}


@dataclass
class ExperimentConfig:
    experiment: str = 'fig1'
    T: int = 61
    ensemble: int = 100
    train_ensemble: int = 1000
    seed: int = 0
    alphas: tuple = None
    polarities: tuple = ('unipolar', 'bipolar')
    rate: float = 1.5
    rate_alt: float = 2.0
    amplitude: float = 0.7
    iterations: int = None
    bits: tuple = (4, 5, 6, 7, 8, 9, 10)
    grid_per_period: int = 64
    calibration_tol: float = 0.02

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError('experiment must be one of %s' % (EXPERIMENTS,))
        self.T = check_period(self.T)
        if self.alphas is None:
            self.alphas = DEFAULT_ALPHAS[self.experiment]
        if self.iterations is None:
            self.iterations = DEFAULT_ITERATIONS[self.experiment]
        if self.experiment == 'quant':
            self.polarities = ('unipolar',)
            if self.rate == 1.5:
                self.rate = 2.0
        self.alphas = tuple(float(a) for a in self.alphas)
        self.polarities = tuple(self.polarities)
        self.bits = tuple(int(b) for b in self.bits)
        if self.ensemble < 1 or self.train_ensemble < 1:
            raise ValueError('ensembles must have at least one member')
        if not (self.rate > 0 and self.rate_alt > 0):
            raise ValueError('rates must be positive')
        if any(p not in OFFSETS for p in self.polarities):
            raise ValueError('polarities must be unipolar or bipolar')
        if any(a < 0 for a in self.alphas):
            raise ValueError('alphas must be >= 0')

    @classmethod
    def from_dict(cls, d):
        known = {f.name for f in fields(cls)}
        extra = set(d) - known
        if extra:
            raise ValueError('unknown config keys: %s' % ', '.join(sorted(extra)))
        return cls(**d)

    def to_dict(self):
        d = asdict(self)
        for k in ('alphas', 'polarities', 'bits'):
            d[k] = list(d[k])
        return d


@dataclass
class ExperimentRecord:
    """Config snapshot, result rows and bookkeeping of one experiment run."""

    config: dict
    columns: tuple
    rows: list
    extras: dict = field(default_factory=dict)
    wall_clock: float = 0.0
    version: str = __version__

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator='\n')
        w.writerow(self.columns)
        for row in self.rows:
            w.writerow([repr(v) if isinstance(v, float) else v for v in row])
        return buf.getvalue()

    def to_dict(self):
        return {'config': self.config, 'columns': list(self.columns),
                'rows': [list(r) for r in self.rows], 'extras': self.extras,
                'wall_clock': self.wall_clock, 'version': self.version}

    def to_json(self):
        return json.dumps(self.to_dict(), indent=1, sort_keys=True)

    @classmethod
    def from_dict(cls, d):
        return cls(d['config'], tuple(d['columns']), [tuple(r) for r in d['rows']],
                   d.get('extras', {}), d.get('wall_clock', 0.0), d.get('version', ''))

    def select(self, **match):
        idx = {c: i for i, c in enumerate(self.columns)}
        return [r for r in self.rows if all(r[idx[k]] == v for k, v in match.items())]

    def trace(self, arm):
        """MSE trace (dB) of one arm of a figiter/quant record."""
        rows = sorted(self.select(arm=arm), key=lambda r: r[1])
        if not rows:
            raise KeyError(arm)
        return np.array([r[2] for r in rows])

    def value(self, alpha, polarity, method):
        """One fig1 MSE value (dB)."""
        rows = self.select(alpha=alpha, polarity=polarity, method=method)
        if not rows:
            raise KeyError((alpha, polarity, method))
        return rows[0][3]


def _map(fn, items):
    workers = int(os.environ.get('LIFPOCS_WORKERS', '1'))
    if workers <= 1:
        return [fn(i) for i in items]
    with ProcessPoolExecutor(workers) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * workers))))


def draw_inputs(cfg, stream, count):
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, STREAMS[stream]]))
    return [random_bandlimited(cfg.T, cfg.amplitude, rng) for _ in range(count)]


def lif_params(alpha, polarity, threshold=1.0):
    """Encoder settings of a polarity arm.

    Both arms use the two-sided firing rule; the unipolar arm differs by its
    offset ``c = 1``, which keeps the running integral nonnegative for all
    but extreme inputs.
    """
    return LifParams(alpha, OFFSETS[polarity], threshold, 'bipolar')


def _calibrate(cfg, inputs, alpha, polarity, rate):
    try:
        return calibrate_threshold(inputs, lif_params(alpha, polarity), rate,
                                   tol=cfg.calibration_tol, grid=TimeGrid(cfg.T, cfg.grid_per_period))
    except CalibrationError as err:
        raise CalibrationError('alpha=%g %s: %s' % (alpha, polarity, err)) from None


class _Encoder:
    def __init__(self, params, per_period):
        self.params = params
        self.per_period = per_period

    def __call__(self, x):
        return encode(x, self.params, TimeGrid(x.T, self.per_period))


def _encode_all(cfg, inputs, params):
    return _map(_Encoder(params, cfg.grid_per_period), inputs)


def _db(err, ref):
    return float(to_db(err / ref))


def run_fig1(cfg):
    """MSE of the naive, Feichtinger-style and Wiener one-step estimates versus leakage."""
    if cfg.experiment != 'fig1':
        raise ValueError('config is not a fig1 experiment')
    start = time.perf_counter()
    xs = draw_inputs(cfg, 'eval', cfg.ensemble)
    train = draw_inputs(cfg, 'train', cfg.train_ensemble)
    ref = sum(x.norm_sq() for x in xs)
    rows, extras = [], {}
    for polarity in cfg.polarities:
        c = OFFSETS[polarity]
        for alpha in cfg.alphas:
            theta = _calibrate(cfg, xs, alpha, polarity, cfg.rate)
            p = lif_params(alpha, polarity, theta)
            filt = wiener_fit(list(zip(train, _encode_all(cfg, train, p))), p)
            trains = _encode_all(cfg, xs, p)
            err = {'naive': 0.0, 'feichtinger': 0.0, 'wiener': 0.0}
            for x, s in zip(xs, trains):
                xc = x + c
                err['naive'] += (naive_estimate(s, theta) - xc).norm_sq()
                if alpha > 0:
                    err['feichtinger'] += (feichtinger_estimate(s, theta, alpha) - xc).norm_sq()
                err['wiener'] += (wiener_apply(filt, s) - xc).norm_sq()
            for method in ('feichtinger', 'naive', 'wiener'):
                if method == 'feichtinger' and alpha == 0:
                    continue
                rows.append((alpha, polarity, method, _db(err[method], ref)))
            K = (cfg.T - 1) // 2
            ac = np.delete(filt.response, K)
            extras['%s|%g' % (polarity, alpha)] = {
                'threshold': theta,
                'rate': float(np.mean([s.rate for s in trains])),
                'negative_spikes': int(sum(np.sum(s.signs < 0) for s in trains)) if polarity == 'unipolar' else None,
                'wiener_dev_from_theta': float(np.max(np.abs(ac - theta)) / theta) if len(ac) else 0.0,
                'wiener_dc': float(filt.response[K].real),
            }
    return ExperimentRecord(cfg.to_dict(), ('alpha', 'polarity', 'method', 'mse_db'), rows,
                            extras, time.perf_counter() - start)


class _IterMember:
    """Per-member traces for the iterative comparison (picklable)."""

    def __init__(self, params, params_alt, filt, iterations, per_period):
        self.params = params
        self.params_alt = params_alt
        self.filt = filt
        self.iterations = iterations
        self.per_period = per_period

    def __call__(self, x):
        grid = TimeGrid(x.T, self.per_period)
        K = self.iterations
        s = encode(x, self.params, grid)
        ks = build_system(s, self.params)
        out = {'pocs_zero': error_trace(ks, x, K)}
        u = PeriodicBandlimitedSignal.zeros(x.T)
        lazar = []
        for _ in range(K + 1):
            lazar.append((u - x).norm_sq())
            u = lazar_iterate(s, ks, u)
        out['lazar_zero'] = np.array(lazar)
        start = wiener_apply(self.filt, s) - self.params.offset
        out['pocs_uopt'] = error_trace(ks, x, K, start=start)
        s2 = encode(x, self.params_alt, grid)
        out['pocs_zero_rho2'] = error_trace(build_system(s2, self.params_alt), x, K)
        return out


ITER_ARMS = ('lazar_zero', 'pocs_zero', 'pocs_uopt', 'pocs_zero_rho2')


def iter_arm(polarity, alpha, method):
    return '%s|%g|%s' % (polarity, alpha, method)


def run_figiter(cfg):
    """Ensemble MSE traces of Lazar's iteration and POCS (zero start, Wiener start, denser sampling)."""
    if cfg.experiment != 'figiter':
        raise ValueError('config is not a figiter experiment')
    start = time.perf_counter()
    xs = draw_inputs(cfg, 'eval', cfg.ensemble)
    train = draw_inputs(cfg, 'train', cfg.train_ensemble)
    ref = sum(x.norm_sq() for x in xs)
    rows, extras = [], {}
    for polarity in cfg.polarities:
        for alpha in cfg.alphas:
            theta = _calibrate(cfg, xs, alpha, polarity, cfg.rate)
            theta2 = _calibrate(cfg, xs, alpha, polarity, cfg.rate_alt)
            p = lif_params(alpha, polarity, theta)
            p2 = lif_params(alpha, polarity, theta2)
            filt = wiener_fit(list(zip(train, _encode_all(cfg, train, p))), p)
            member = _IterMember(p, p2, filt, cfg.iterations, cfg.grid_per_period)
            results = _map(member, xs)
            for method in ITER_ARMS:
                total = np.sum([r[method] for r in results], axis=0)
                arm = iter_arm(polarity, alpha, method)
                rows.extend((arm, k, float(v)) for k, v in enumerate(to_db(total / ref)))
            extras['%s|%g' % (polarity, alpha)] = {'threshold': theta, 'threshold_alt': theta2}
    return ExperimentRecord(cfg.to_dict(), ('arm', 'k', 'mse_db'), rows, extras,
                            time.perf_counter() - start)


class _QuantMember:
    def __init__(self, params, bits, iterations, per_period):
        self.params = params
        self.bits = bits
        self.iterations = iterations
        self.per_period = per_period

    def __call__(self, x):
        s = encode(x, self.params, TimeGrid(x.T, self.per_period))
        out = {}
        for b in self.bits:
            ks = build_system(quantize_times(s, b), self.params)
            out[b] = (error_trace(ks, x, self.iterations), (pseudo_inverse(ks) - x).norm_sq())
        return out


def run_quant(cfg):
    """POCS traces and pseudo-inverse MSE under b-bit time quantization."""
    if cfg.experiment != 'quant':
        raise ValueError('config is not a quant experiment')
    start = time.perf_counter()
    xs = draw_inputs(cfg, 'eval', cfg.ensemble)
    ref = sum(x.norm_sq() for x in xs)
    alpha = cfg.alphas[0]
    theta = _calibrate(cfg, xs, alpha, 'unipolar', cfg.rate)
    p = lif_params(alpha, 'unipolar', theta)
    results = _map(_QuantMember(p, cfg.bits, cfg.iterations, cfg.grid_per_period), xs)
    rows, pinv = [], {}
    for b in cfg.bits:
        trace = to_db(np.sum([r[b][0] for r in results], axis=0) / ref)
        const = _db(sum(r[b][1] for r in results), ref)
        pinv[str(b)] = const
        rows.extend(('pocs_b%d' % b, k, float(v)) for k, v in enumerate(trace))
        rows.extend(('pinv_b%d' % b, k, const) for k in range(len(trace)))
    extras = {'threshold': theta, 'alpha': alpha, 'pinv_mse_db': pinv}
    return ExperimentRecord(cfg.to_dict(), ('arm', 'k', 'mse_db'), rows, extras,
                            time.perf_counter() - start)


def run_experiment(cfg):
    return {'fig1': run_fig1, 'figiter': run_figiter, 'quant': run_quant}[cfg.experiment](cfg)
