"""Line plots of experiment records.

Plots are drawn from the CSV text of a record, so re-rendering a saved CSV
gives the same bytes as rendering the record that produced it.
"""

import csv
import io
import os

import matplotlib

matplotlib.use('Agg')
import matplotlib.pyplot as plt  # noqa: E402

__all__ = ['render_plots', 'render_csv', 'read_rows']

METHOD_LABELS = {'naive': 'spike train through ideal low-pass',
                 'feichtinger': 'resampled leaky integral',
                 'wiener': 'Wiener filter',
                 'lazar_zero': "Lazar's iteration",
                 'pocs_zero': 'POCS from 0',
                 'pocs_uopt': 'POCS from Wiener estimate',
                 'pocs_zero_rho2': 'POCS from 0, rho = 2'}
STYLE = {'axes.grid': True, 'svg.hashsalt': 'lifpocs', 'svg.fonttype': 'path',
         'figure.figsize': (6.0, 4.0), 'font.size': 9}


def read_rows(text):
    """Parse a record CSV; returns (columns, rows) with numbers converted."""
    reader = csv.reader(io.StringIO(text))
    columns = tuple(next(reader))
    rows = []
    for r in reader:
        rows.append(tuple(_number(v) for v in r))
    return columns, rows


def _number(v):
    for cast in (int, float):
        try:
            return cast(v)
        except ValueError:
            pass
    return v


def _save(fig, path):
    fig.savefig(path, format='svg', metadata={'Date': None, 'Creator': None})
    plt.close(fig)
    return path


def _fig1(rows, out_dir, stem):
    paths = []
    for polarity in sorted({r[1] for r in rows}, reverse=True):
        fig, ax = plt.subplots()
        for method in ('feichtinger', 'naive', 'wiener'):
            pts = sorted((r[0], r[3]) for r in rows if r[1] == polarity and r[2] == method)
            if pts:
                ax.plot(*zip(*pts), marker='o', label=METHOD_LABELS[method])
        ax.set_xlabel('leakage alpha')
        ax.set_ylabel('MSE (dB)')
        ax.set_title('one-step estimates, %s' % polarity)
        ax.legend()
        paths.append(_save(fig, os.path.join(out_dir, '%s_%s.svg' % (stem, polarity))))
    return paths


def _traces(rows):
    out = {}
    for arm, k, v in rows:
        out.setdefault(arm, []).append((k, v))
    return {arm: sorted(pts) for arm, pts in out.items()}


def _figiter(rows, out_dir, stem):
    groups = {}
    for arm, pts in _traces(rows).items():
        polarity, alpha, method = arm.split('|')
        groups.setdefault((polarity, alpha), {})[method] = pts
    paths = []
    for (polarity, alpha), arms in sorted(groups.items()):
        fig, ax = plt.subplots()
        for method in sorted(arms):
            ax.plot(*zip(*arms[method]), label=METHOD_LABELS.get(method, method))
        ax.set_xlabel('iteration k')
        ax.set_ylabel('MSE (dB)')
        ax.set_title('%s, alpha = %s' % (polarity, alpha))
        ax.legend()
        name = '%s_%s_alpha%s.svg' % (stem, polarity, alpha)
        paths.append(_save(fig, os.path.join(out_dir, name)))
    return paths


def _quant(rows, out_dir, stem):
    traces = _traces(rows)
    bits = sorted({int(arm.split('_b')[1]) for arm in traces})
    fig, ax = plt.subplots()
    for i, b in enumerate(bits):
        color = 'C%d' % (i % 10)
        pocs = traces.get('pocs_b%d' % b)
        if pocs:
            ax.plot(*zip(*pocs), color=color, label='%d bits' % b)
        pinv = traces.get('pinv_b%d' % b)
        if pinv:
            ax.plot(*zip(*pinv), color=color, linestyle='-.')
    ax.set_xlabel('iteration k')
    ax.set_ylabel('MSE (dB)')
    ax.set_title('quantized firing times (dash-dot: pseudo-inverse)')
    ax.legend(fontsize=7)
    return [_save(fig, os.path.join(out_dir, '%s.svg' % stem))]


def render_csv(text, experiment, out_dir, stem=None):
    """Render the plots of a record CSV into ``out_dir``; returns the SVG paths."""
    columns, rows = read_rows(text)
    draw = {'fig1': _fig1, 'figiter': _figiter, 'quant': _quant}[experiment]
    expected = ('alpha', 'polarity', 'method', 'mse_db') if experiment == 'fig1' else ('arm', 'k', 'mse_db')
    if columns != expected:
        raise ValueError('CSV columns %s do not match a %s record' % (columns, experiment))
    os.makedirs(out_dir, exist_ok=True)
    with plt.rc_context(STYLE):
        return draw(rows, out_dir, stem or experiment)


def render_plots(rec, out_dir):
    """Write the record CSV and its plots to ``out_dir``; returns all written paths."""
    os.makedirs(out_dir, exist_ok=True)
    experiment = rec.config['experiment']
    text = rec.to_csv()
    csv_path = os.path.join(out_dir, '%s.csv' % experiment)
    with open(csv_path, 'w') as fh:
        fh.write(text)
    return [csv_path] + render_csv(text, experiment, out_dir)
