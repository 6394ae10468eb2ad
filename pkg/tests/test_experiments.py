import json
import os

import numpy as np
import pytest

from lifpocs.cli import main
from lifpocs.encoder import CalibrationError
from lifpocs.experiments import (ExperimentConfig, ExperimentRecord, draw_inputs, run_experiment,
                                 run_fig1)
from lifpocs.plotting import render_csv, render_plots


def small(experiment, **kw):
    base = dict(experiment=experiment, T=11, ensemble=4, train_ensemble=12, seed=3)
    if experiment != 'quant':
        base['alphas'] = (0.03, 1.5)
    if experiment != 'fig1':
        base['iterations'] = 15
    base.update(kw)
    return ExperimentConfig(**base)


@pytest.fixture(scope='module')
def records():
    return {e: run_experiment(small(e, bits=(4, 6)) if e == 'quant' else small(e))
            for e in ('fig1', 'figiter', 'quant')}


class TestConfig:

    def test_defaults(self):
        cfg = ExperimentConfig()
        assert cfg.T == 61 and cfg.ensemble == 100 and cfg.rate == 1.5
        assert 0.03 in cfg.alphas
        q = ExperimentConfig(experiment='quant')
        assert q.rate == 2.0 and q.polarities == ('unipolar',) and q.alphas == (0.03,)

    @pytest.mark.parametrize('kw', [dict(T=10), dict(ensemble=0), dict(rate=0.0),
                                    dict(experiment='fig9'), dict(polarities=('tripolar',))])
    def test_rejects(self, kw):
        with pytest.raises(ValueError):
            ExperimentConfig(**kw)

    def test_dict(self):
        cfg = small('figiter')
        assert ExperimentConfig.from_dict(cfg.to_dict()) == cfg
        with pytest.raises(ValueError):
            ExperimentConfig.from_dict({'bogus': 1})

    def test_streams_disjoint(self):
        cfg = small('fig1')
        ev, tr = draw_inputs(cfg, 'eval', 3), draw_inputs(cfg, 'train', 3)
        assert not np.allclose(ev[0].coeffs, tr[0].coeffs)
        np.testing.assert_array_equal(draw_inputs(cfg, 'eval', 3)[2].coeffs, ev[2].coeffs)


class TestRecords:

    def test_fig1_rows(self, records):
        rec = records['fig1']
        assert len(rec.rows) == 2 * 2 * 3
        assert rec.columns == ('alpha', 'polarity', 'method', 'mse_db')
        assert all(np.isfinite(r[3]) for r in rec.rows)
        assert rec.value(0.03, 'unipolar', 'wiener') <= rec.value(0.03, 'unipolar', 'naive') + 0.5

    def test_figiter_traces(self, records):
        rec = records['figiter']
        for pol in ('unipolar', 'bipolar'):
            for a in (0.03, 1.5):
                tr = rec.trace('%s|%g|pocs_zero' % (pol, a))
                assert len(tr) == 16 and tr[0] == 0.0
                assert np.all(np.diff(tr) <= 1e-9)
                assert rec.trace('%s|%g|pocs_uopt' % (pol, a))[0] < tr[0]

    def test_quant_traces(self, records):
        rec = records['quant']
        assert rec.trace('pinv_b6')[0] < rec.trace('pinv_b4')[0]
        assert set(rec.extras['pinv_mse_db']) == {'4', '6'}

    def test_deterministic_csv(self, records):
        again = run_fig1(small('fig1'))
        assert again.to_csv() == records['fig1'].to_csv()

    def test_json_round_trip(self, records):
        rec = records['figiter']
        back = ExperimentRecord.from_dict(json.loads(rec.to_json()))
        assert back.to_csv() == rec.to_csv()
        assert back.version == rec.version

    def test_calibration_failure_names_alpha(self):
        with pytest.raises(CalibrationError, match='alpha=0.5'):
            run_fig1(small('fig1', alphas=(0.5,), rate=1e-6))

    def test_worker_pool_matches_serial(self, records, monkeypatch):
        monkeypatch.setenv('LIFPOCS_WORKERS', '2')
        assert run_experiment(small('quant', bits=(4, 6))).to_csv() == records['quant'].to_csv()


class TestPlots:

    def test_counts(self, records, tmp_path):
        svg = lambda paths: [p for p in paths if p.endswith('.svg')]
        assert len(svg(render_plots(records['fig1'], tmp_path / 'a'))) == 2
        assert len(svg(render_plots(records['figiter'], tmp_path / 'b'))) == 4
        assert len(svg(render_plots(records['quant'], tmp_path / 'c'))) == 1

    def test_reingest_byte_identical(self, records, tmp_path):
        for name, rec in records.items():
            paths = render_plots(rec, tmp_path / 'first')
            with open(paths[0]) as fh:
                again = render_csv(fh.read(), name, tmp_path / 'second')
            for p, q in zip(paths[1:], again):
                with open(p, 'rb') as f1, open(q, 'rb') as f2:
                    assert f1.read() == f2.read()

    def test_wrong_columns(self, records, tmp_path):
        with pytest.raises(ValueError):
            render_csv(records['quant'].to_csv(), 'fig1', tmp_path)


class TestCli:

    def test_encode_reconstruct(self, tmp_path):
        out = str(tmp_path)
        assert main(['encode', '--seed', '2', '--T', '11', '--out-dir', out]) == 0
        assert main(['reconstruct', os.path.join(out, 'spikes.csv'), '--period', '11',
                     '--method', 'pinv', '--out-dir', out, '--format', 'json']) == 0
        with open(os.path.join(out, 'input.json')) as fh:
            x = np.array(json.load(fh)['coeffs'])
        with open(os.path.join(out, 'estimate.json')) as fh:
            u = np.array(json.load(fh)['coeffs'])
        np.testing.assert_allclose(u, x, atol=1e-9)

    @pytest.mark.parametrize('method', ['naive', 'feichtinger', 'lazar', 'pocs', 'yeh-stark'])
    def test_methods(self, tmp_path, method):
        out = str(tmp_path)
        cfg = tmp_path / 'cfg.json'
        cfg.write_text(json.dumps({'alpha': 0.2, 'threshold': 0.3, 'iterations': 5}))
        main(['encode', '--seed', '1', '--T', '7', '--config', str(cfg), '--out-dir', out, '--format', 'json'])
        assert main(['reconstruct', os.path.join(out, 'spikes.json'), '--config', str(cfg),
                     '--method', method, '--out-dir', out]) == 0
        assert (tmp_path / 'estimate.csv').read_text().startswith('t,value')

    def test_experiment(self, tmp_path):
        cfg = tmp_path / 'cfg.json'
        cfg.write_text(json.dumps({'T': 11, 'ensemble': 3, 'iterations': 5, 'bits': [4, 5]}))
        assert main(['experiment', 'quant', '--config', str(cfg), '--seed', '4',
                     '--out-dir', str(tmp_path), '--format', 'json']) == 0
        assert {'quant.csv', 'quant.svg', 'quant.json'} <= set(os.listdir(tmp_path))
        assert json.loads((tmp_path / 'quant.json').read_text())['config']['seed'] == 4

    def test_bad_config(self, tmp_path, capsys):
        cfg = tmp_path / 'cfg.json'
        cfg.write_text(json.dumps({'nested': {'a': 1}}))
        assert main(['encode', '--config', str(cfg), '--out-dir', str(tmp_path)]) == 2
        assert 'flat' in capsys.readouterr().err
