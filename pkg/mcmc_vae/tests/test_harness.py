#!/usr/bin/env python3
# coding: utf-8
#
# Copyright 2026 mcmc_vae Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
#
# SPDX-License-Identifier: Apache-2.0

import unittest
import contextlib
import csv
import io
import json
import os
import sys
import tempfile

import numpy as np

# add `mcmc_vae` source tree into PYTHONPATH
sys.path.append(os.path.join(os.path.dirname(__file__), '..', '..'))

from mcmc_vae import harness, training
from mcmc_vae.__main__ import main, parse_values
from mcmc_vae.errors import ConfigError, IoError

TINY = '''\
[data]
kind = synthetic-linear
n1 = 2
n2 = 2
dx = 4
n = 40
gen_seed = 5

[train]
variant = gradhmc-lt
pretrain_epochs = 1
mcmc_epochs = 1
batch_size = 20
seed = 2

[eval]
S = 20
n_points = 5
'''


class TestConfig(unittest.TestCase):

    def test_defaults(self):
        cfg = harness.load_config(text='')
        self.assertEqual(cfg.data.kind, 'synthetic-linear')
        self.assertEqual(cfg.model.n1, cfg.data.n1)
        self.assertEqual(cfg.eval.S, 1000)
        self.assertEqual(cfg.seeds, 1)

    def test_variant_sets_the_kernel(self):
        cfg = harness.load_config(text='[train]\nvariant = dsmala-d\n')
        self.assertEqual((cfg.train.kernel, cfg.train.preconditioner, cfg.train.adaptation),
                         ('mala', 'diagonal', 'dual-averaging'))

    def test_explicit_keys_override_the_variant(self):
        cfg = harness.load_config(text='[train]\nvariant = gradhmc-lt\n'
                                       'preconditioner = diagonal\n')
        self.assertEqual(cfg.train.kernel, 'hmc')
        self.assertEqual(cfg.train.preconditioner, 'diagonal')

    def test_unknown_key(self):
        with self.assertRaises(ConfigError) as ctx:
            harness.load_config(text='[train]\n\nbogus = 1\n')
        self.assertEqual(ctx.exception.key, 'bogus')
        self.assertEqual(ctx.exception.lineno, 3)

    def test_unknown_section(self):
        with self.assertRaises(ConfigError) as ctx:
            harness.load_config(text='[trainer]\nK = 1\n')
        self.assertEqual(ctx.exception.lineno, 2)

    def test_type_mismatch(self):
        with self.assertRaises(ConfigError) as ctx:
            harness.load_config(text='[train]\nK = fast\n')
        self.assertEqual(ctx.exception.key, 'K')
        self.assertTrue(str(ctx.exception).startswith('line 2: '))

    def test_bad_choice(self):
        with self.assertRaises(ConfigError):
            harness.load_config(text='[train]\nkernel = nuts\n')

    def test_unknown_variant(self):
        with self.assertRaises(ConfigError) as ctx:
            harness.load_config(text='[train]\nvariant = gradnuts\n')
        self.assertEqual(ctx.exception.key, 'variant')

    def test_value_checks_carry_line_numbers(self):
        with self.assertRaises(ConfigError) as ctx:
            harness.load_config(text='[data]\nn = 10\n[train]\nbatch_size = 0\n')
        self.assertEqual(ctx.exception.key, 'batch_size')
        self.assertEqual(ctx.exception.lineno, 4)
        with self.assertRaises(ConfigError):
            harness.load_config(text='[eval]\ntau = 0.5\n')

    def test_integers_are_accepted_as_floats(self):
        cfg = harness.load_config(text='[train]\nlr_theta = 1\n')
        self.assertIsInstance(cfg.train.lr_theta, float)

    def test_all_presets_load(self):
        for name in harness.PRESETS:
            with self.subTest(name):
                cfg = harness.load_config(preset=name)
                self.assertIn(cfg.variant, harness.VARIANTS)

    def test_preset_scales(self):
        cfg = harness.load_config(preset='linear-10-20-lt-hmc')
        self.assertEqual((cfg.train.pretrain_epochs, cfg.train.mcmc_epochs, cfg.train.K),
                         (100, 100, 2))
        self.assertEqual(cfg.train.lr_theta, 1e-3)
        cfg = harness.load_config(preset='linear-50-100-lt-hmc')
        self.assertEqual((cfg.train.pretrain_epochs, cfg.train.K), (500, 10))
        cfg = harness.load_config(preset='nonlinear-5-10-smoke')
        self.assertEqual((cfg.train.pretrain_epochs, cfg.train.mcmc_epochs), (19, 1))
        self.assertTrue(cfg.train.freeze_prior_during_mcmc)
        cfg = harness.load_config(preset='linear-10-20-baseline')
        self.assertFalse(cfg.train.uses_mcmc)

    def test_unknown_preset(self):
        with self.assertRaises(ConfigError):
            harness.load_config(preset='linear-1-2')

    def test_dump_round_trip(self):
        for name in harness.PRESETS:
            with self.subTest(name):
                cfg = harness.load_config(preset=name)
                again = harness.load_config(text=harness.dump_config(cfg))
                self.assertEqual(again.sections, cfg.sections)

    def test_overrides(self):
        cfg = harness.load_config(text=TINY)
        other = harness.with_overrides(cfg, {'train.K': 5, 'output.dir': 'x'})
        self.assertEqual(other.train.K, 5)
        self.assertEqual(other.output_dir, 'x')
        self.assertEqual(cfg.train.K, 2)
        with self.assertRaises(ConfigError):
            harness.with_overrides(cfg, {'train.speed': 1})


class TestFiles(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = self.tmp.name

    def tearDown(self):
        self.tmp.cleanup()

    def test_dataset_round_trip(self):
        path = os.path.join(self.dir, 'd.bin')
        data = np.arange(12.0).reshape(4, 3)
        harness.write_dataset(path, data)
        np.testing.assert_array_equal(harness.read_dataset(path), data)
        with open(path, 'rb') as fp:
            self.assertEqual(fp.read(8), harness.DATASET_MAGIC)

    def test_empty_dataset(self):
        path = os.path.join(self.dir, 'e.bin')
        harness.write_dataset(path, np.zeros((0, 3)))
        self.assertEqual(harness.read_dataset(path).shape, (0, 3))

    def test_bad_dataset(self):
        path = os.path.join(self.dir, 'bad.bin')
        with open(path, 'wb') as fp:
            fp.write(b'NOTADATA' + bytes(20))
        with self.assertRaises(IoError):
            harness.read_dataset(path)
        harness.write_dataset(path, np.ones((2, 2)))
        with open(path, 'rb') as fp:
            blob = fp.read()
        with open(path, 'wb') as fp:
            fp.write(blob[:-8])
        with self.assertRaises(IoError):
            harness.read_dataset(path)
        with self.assertRaises(IoError):
            harness.read_dataset(os.path.join(self.dir, 'missing.bin'))

    def test_checkpoint_round_trip(self):
        prefix = os.path.join(self.dir, 'ck')
        tensors = {'theta/A2': np.arange(6.0).reshape(2, 3), 'phi1/beta': np.array(1.5)}
        harness.save_checkpoint(prefix, tensors, {'kind': 'linear-hvae'})
        loaded, meta = harness.load_checkpoint(prefix)
        self.assertEqual(meta, {'kind': 'linear-hvae'})
        np.testing.assert_array_equal(loaded['theta/A2'], tensors['theta/A2'])
        self.assertEqual(loaded['phi1/beta'].shape, ())
        self.assertEqual(float(loaded['phi1/beta']), 1.5)

    def test_scalar_tensors_keep_their_shape(self):
        prefix = os.path.join(self.dir, 'scalars')
        tensors = {'beta': np.float64(0.3), 'log_h': 0.0, 'v': np.ones(3)}
        harness.save_checkpoint(prefix, tensors)
        loaded, _ = harness.load_checkpoint(prefix)
        self.assertEqual(loaded['beta'].shape, ())
        self.assertEqual(loaded['log_h'].shape, ())
        self.assertEqual(float(loaded['beta']), 0.3)
        np.testing.assert_array_equal(loaded['v'], np.ones(3))

    def test_bad_manifest(self):
        prefix = os.path.join(self.dir, 'ck')
        harness.save_checkpoint(prefix, {'a': np.ones(2)})
        with open(prefix + '.manifest', 'w') as fp:
            fp.write('something else\n')
        with self.assertRaises(IoError):
            harness.load_checkpoint(prefix)

    def test_generate_data_is_reproducible(self):
        spec = harness.DataSpec(n1=2, n2=2, dx=4, n=10, gen_seed=3)
        a = os.path.join(self.dir, 'a.bin')
        b = os.path.join(self.dir, 'b.bin')
        data, truth = harness.generate_data(spec, a)
        harness.generate_data(spec, b)
        with open(a, 'rb') as fa, open(b, 'rb') as fb:
            self.assertEqual(fa.read(), fb.read())
        self.assertEqual(data.shape, (10, 4))
        loaded = harness.load_truth(os.path.join(self.dir, 'a-truth'))
        np.testing.assert_array_equal(loaded.marginal_moments()[1],
                                      truth.marginal_moments()[1])
        np.testing.assert_array_equal(truth.theta['c2_mu'], np.zeros(2))

    def test_generate_nonlinear_data(self):
        spec = harness.DataSpec(kind='synthetic-nonlinear', n1=2, n2=2, dx=4, n=8,
                                hidden=5)
        data, _ = harness.generate_data(spec, os.path.join(self.dir, 'n.bin'))
        self.assertEqual(data.shape, (8, 4))
        self.assertTrue(np.all(np.isfinite(data)))


class TestRuns(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = self.tmp.name

    def tearDown(self):
        self.tmp.cleanup()

    def test_run_then_evaluate(self):
        cfg = harness.load_config(text=TINY)
        out = os.path.join(self.dir, 'run')
        report = harness.run(cfg, out)
        for name in ('data.bin', 'metrics.csv', 'events.jsonl', 'final.bin',
                     'final.manifest', 'evaluation.json'):
            self.assertTrue(os.path.exists(os.path.join(out, name)), name)
        self.assertEqual(report['kernel'], 'hmc')
        self.assertIsNotNone(report['kappa_transformed'])
        self.assertIsNotNone(report['gap_abs'])
        self.assertTrue(np.isfinite(report['is_loglik_mean']))
        with open(os.path.join(out, 'evaluation.json')) as fp:
            self.assertEqual(json.load(fp)['S'], 20)

        again = harness.evaluate_experiment(cfg, out)
        self.assertAlmostEqual(again['kappa_transformed'], report['kappa_transformed'])
        self.assertAlmostEqual(again['is_loglik_mean'], report['is_loglik_mean'])

    def test_sweep(self):
        cfg = harness.load_config(text=TINY)
        rows = harness.sweep(cfg, 'train.variant', ['hvae', 'gradmala-d'], self.dir)
        self.assertEqual([r['failed'] for r in rows], [0, 0])
        self.assertEqual([r['runs'] for r in rows], [1, 1])
        with open(os.path.join(self.dir, 'summary.csv')) as fp:
            table = list(csv.reader(fp))
        self.assertEqual(table[0][:3], ['train.variant', 'runs', 'failed'])
        self.assertEqual([r[0] for r in table[1:]], ['hvae', 'gradmala-d'])
        self.assertTrue(os.path.exists(os.path.join(
            self.dir, 'train.variant=hvae', 'seed-0', 'config.cfg')))

    def test_sweep_marks_failed_cells(self):
        cfg = harness.load_config(
            text='[data]\nkind = file\npath = %s\n' % os.path.join(self.dir, 'none.bin'))
        rows = harness.sweep(cfg, 'train.seed', [1], self.dir)
        self.assertEqual((rows[0]['runs'], rows[0]['failed']), (0, 1))

    def test_sweep_validates_values_first(self):
        cfg = harness.load_config(text=TINY)
        out = os.path.join(self.dir, 'sweep')
        with self.assertRaises(ConfigError):
            harness.sweep(cfg, 'train.variant', ['hvae', 'gradnuts'], out)
        self.assertFalse(os.path.exists(os.path.join(out, 'train.variant=hvae')))


class TestReducedPreset(unittest.TestCase):
    """Short runs of the 10-20 linear preset comparing preconditioners."""

    @classmethod
    def setUpClass(cls):
        cls.runs = {}
        with tempfile.TemporaryDirectory() as tmp:
            for variant in ('gradhmc-lt', 'gradhmc-d'):
                cfg = harness.load_config(preset='linear-10-20-lt-hmc')
                cfg = harness.with_overrides(cfg, {
                    'train.variant': variant, 'data.n': 500,
                    'train.pretrain_epochs': 5, 'train.mcmc_epochs': 10,
                    'train.lr_theta': 1e-2, 'train.lr_phi0': 1e-2,
                    'train.lr_phi1': 3e-3})
                out_dir = os.path.join(tmp, variant)
                os.makedirs(out_dir)
                data, truth = harness.prepare_data(cfg, out_dir)
                model = harness.make_model(cfg, data.shape[1])
                _, metrics = training.train(model, data, cfg.train, truth)
                cls.runs[variant] = metrics

    def test_lower_triangular_reduces_the_condition_number(self):
        last = self.runs['gradhmc-lt'][-1]
        self.assertLess(last.kappa_transformed, last.kappa_raw)

    def test_gap_shrinks_during_mcmc_training(self):
        metrics = self.runs['gradhmc-lt']
        self.assertLess(abs(metrics[-1].delta_loglik), abs(metrics[4].delta_loglik))

    def test_lower_triangular_beats_diagonal(self):
        lt, diag = self.runs['gradhmc-lt'][-1], self.runs['gradhmc-d'][-1]
        self.assertLess(lt.kappa_transformed / lt.kappa_raw,
                        diag.kappa_transformed / diag.kappa_raw)


class TestCommandLine(unittest.TestCase):

    def test_parse_values(self):
        self.assertEqual(parse_values('hvae, gradmala-lt'), ['hvae', 'gradmala-lt'])
        self.assertEqual(parse_values('3'), [3])

    def test_config_errors_exit_one(self):
        err = io.StringIO()
        with contextlib.redirect_stderr(err):
            self.assertEqual(main(['run', '--preset', 'nope']), 1)
            self.assertEqual(main(['run']), 1)
        lines = err.getvalue().splitlines()
        self.assertTrue(lines[0].startswith('error: ConfigError: '))

    def test_runtime_errors_exit_two(self):
        with tempfile.TemporaryDirectory() as tmp:
            err = io.StringIO()
            with contextlib.redirect_stderr(err):
                code = main(['train', '--config', os.path.join(tmp, 'missing.cfg')])
        self.assertEqual(code, 2)
        self.assertIn('error: IoError: ', err.getvalue())

    def test_malformed_config_writes_nothing(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, 'bad.cfg')
            out = os.path.join(tmp, 'out')
            with open(path, 'w') as fp:
                fp.write('[output]\ndir = %s\n[train]\nbogus = 1\n' % out)
            with contextlib.redirect_stderr(io.StringIO()):
                self.assertEqual(main(['run', '--config', path]), 1)
            self.assertFalse(os.path.exists(out))

    def test_dump_config(self):
        buf = io.StringIO()
        with contextlib.redirect_stdout(buf):
            code = main(['run', '--preset', 'linear-10-20-baseline', '--seed', '9',
                         '--dump-config'])
        self.assertEqual(code, 0)
        text = buf.getvalue()
        self.assertIn('variant = hvae', text)
        self.assertIn('seed = 9', text)
        self.assertEqual(harness.load_config(text=text).train.seed, 9)
