"""Command line entry point: ``lifpocs encode | reconstruct | experiment``.

Settings come from a flat JSON object (``--config``) and are overridden by
command line flags.  Outputs are written to ``--out-dir`` as CSV or JSON.
"""

import argparse
import json
import logging
import os
import sys

from . import __version__
from .encoder import LifParams, SpikeTrain, encode, quantize_times
from .experiments import ExperimentConfig, run_experiment
from .kernels import build_system
from .pocs import pocs_run, pseudo_inverse, yeh_stark_sweep
from .reconstruct import feichtinger_estimate, lazar_iterate, naive_estimate
from .signal import PeriodicBandlimitedSignal, TimeGrid, random_bandlimited

log = logging.getLogger('lifpocs')

ENCODE_DEFAULTS = {'T': 61, 'amplitude': 0.7, 'alpha': 0.03, 'offset': 1.0,
                   'threshold': 0.5, 'mode': 'bipolar', 'bits': None}
RECONSTRUCT_DEFAULTS = {'alpha': 0.03, 'offset': 1.0, 'threshold': 0.5, 'mode': 'bipolar',
                        'method': 'pocs', 'iterations': 500}
METHODS = ('naive', 'feichtinger', 'lazar', 'pocs', 'yeh-stark', 'pinv')


def load_config(path):
    if path is None:
        return {}
    with open(path) as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict) or any(isinstance(v, dict) for v in cfg.values()):
        raise ValueError('config must be a flat JSON object')
    return cfg


def _settings(defaults, cfg, args):
    # one config file may serve both encode and reconstruct
    unknown = set(cfg) - set(ENCODE_DEFAULTS) - set(RECONSTRUCT_DEFAULTS)
    if unknown:
        raise ValueError('unknown config keys: %s' % ', '.join(sorted(unknown)))
    out = dict(defaults)
    out.update((k, v) for k, v in cfg.items() if k in defaults)
    for key in defaults:
        val = getattr(args, key, None)
        if val is not None:
            out[key] = val
    return out


def _write(out_dir, name, text):
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, name)
    with open(path, 'w') as fh:
        fh.write(text)
    log.info('wrote %s', path)
    return path


def _params(s):
    return LifParams(float(s['alpha']), float(s['offset']), float(s['threshold']), s['mode'])


def cmd_encode(args):
    s = _settings(ENCODE_DEFAULTS, load_config(args.config), args)
    if args.input:
        with open(args.input) as fh:
            x = PeriodicBandlimitedSignal.from_dict(json.load(fh))
    else:
        x = random_bandlimited(int(s['T']), float(s['amplitude']), args.seed)
    train = encode(x, _params(s), TimeGrid(x.T))
    if s['bits'] is not None:
        train = quantize_times(train, int(s['bits']))
    paths = []
    if args.format == 'json':
        paths.append(_write(args.out_dir, 'spikes.json', json.dumps(train.to_dict(), indent=1)))
    else:
        paths.append(_write(args.out_dir, 'spikes.csv', train.to_csv()))
    if not args.input:
        paths.append(_write(args.out_dir, 'input.json', json.dumps(x.to_dict(), indent=1)))
    print('%d spikes (rate %.3f)' % (train.N, train.rate))
    return paths


def _load_train(path, T):
    with open(path) as fh:
        text = fh.read()
    if path.endswith('.json'):
        return SpikeTrain.from_dict(json.loads(text))
    if T is None:
        raise ValueError('--period is required for CSV spike trains')
    return SpikeTrain.from_csv(text, T)


def reconstruct_train(train, params, method, iterations):
    """Estimate of ``x`` (offset removed) from a spike train."""
    c = params.offset
    if method == 'naive':
        return naive_estimate(train, params.threshold) - c
    if method == 'feichtinger':
        return feichtinger_estimate(train, params.threshold, params.alpha) - c
    ks = build_system(train, params)
    if method == 'pinv':
        return pseudo_inverse(ks)
    if method == 'pocs':
        return pocs_run(ks, iterations)[1]
    u = PeriodicBandlimitedSignal.zeros(train.T)
    step = {'lazar': lambda v: lazar_iterate(train, ks, v),
            'yeh-stark': lambda v: yeh_stark_sweep(v, ks)}[method]
    for _ in range(iterations):
        u = step(u)
    return u


def cmd_reconstruct(args):
    s = _settings(RECONSTRUCT_DEFAULTS, load_config(args.config), args)
    if s['method'] not in METHODS:
        raise ValueError('method must be one of %s' % (METHODS,))
    train = _load_train(args.spikes, args.period)
    u = reconstruct_train(train, _params(s), s['method'], int(s['iterations']))
    if args.format == 'json':
        return [_write(args.out_dir, 'estimate.json', json.dumps(u.to_dict(), indent=1))]
    grid = TimeGrid(u.T, args.per_period)
    lines = ['t,value'] + ['%r,%r' % (float(t), float(v)) for t, v in zip(grid.instants, u(grid.instants))]
    return [_write(args.out_dir, 'estimate.csv', '\n'.join(lines) + '\n')]


def cmd_experiment(args):
    from .plotting import render_plots

    cfg = load_config(args.config)
    cfg['experiment'] = args.name
    if args.seed is not None:
        cfg['seed'] = args.seed
    rec = run_experiment(ExperimentConfig.from_dict(cfg))
    paths = render_plots(rec, args.out_dir)
    if args.format == 'json':
        paths.append(_write(args.out_dir, '%s.json' % args.name, rec.to_json()))
    print('%s finished in %.1f s' % (args.name, rec.wall_clock))
    return paths


def build_parser():
    p = argparse.ArgumentParser(prog='lifpocs', description=__doc__.splitlines()[0])
    p.add_argument('--version', action='version', version=__version__)
    p.add_argument('-v', '--verbose', action='store_true')
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', help='flat JSON settings file')
    common.add_argument('--seed', type=int, default=None)
    common.add_argument('--out-dir', default='.')
    common.add_argument('--format', choices=('csv', 'json'), default='csv')
    sub = p.add_subparsers(dest='command', required=True)

    e = sub.add_parser('encode', parents=[common], help='encode a signal into spikes')
    e.add_argument('--input', help='signal JSON; a random signal is drawn when omitted')
    e.add_argument('--T', type=int)
    e.add_argument('--amplitude', type=float)
    e.add_argument('--bits', type=int, help='quantize firing times to 2**-bits')
    r = sub.add_parser('reconstruct', parents=[common], help='reconstruct a signal from spikes')
    r.add_argument('spikes', help='spike train CSV or JSON')
    r.add_argument('--period', type=int, help='period T (needed for CSV input)')
    r.add_argument('--method', choices=METHODS)
    r.add_argument('--iterations', type=int)
    r.add_argument('--per-period', type=int, default=8, help='output samples per unit time')
    for q in (e, r):
        q.add_argument('--alpha', type=float)
        q.add_argument('--offset', type=float)
        q.add_argument('--threshold', type=float)
        q.add_argument('--mode', choices=('unipolar', 'bipolar'))
    x = sub.add_parser('experiment', parents=[common], help='run a Monte Carlo experiment')
    x.add_argument('name', choices=('fig1', 'figiter', 'quant'))
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format='%(levelname)s %(message)s')
    handler = {'encode': cmd_encode, 'reconstruct': cmd_reconstruct,
               'experiment': cmd_experiment}[args.command]
    try:
        handler(args)
    except (ValueError, OSError) as err:
        print('error: %s' % err, file=sys.stderr)
        return 2
    return 0


if __name__ == '__main__':
    sys.exit(main())
