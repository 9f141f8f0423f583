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
"""Experiment plumbing: configuration, data files, checkpoints and runs.

A run reads a configuration, generates or loads a dataset, trains, and
writes ``metrics.csv``, ``events.jsonl``, ``final.bin``/``final.manifest``
and ``evaluation.json`` into its output directory.
"""

import csv
import logging
import os
import struct
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import cfgparse
from . import cfgwrite
from . import evaluation
from . import training
from .errors import ConfigError, IoError, McmcVaeError
from .models import LinearHVAE, MlpHVAE, build_model
from .numerics import RngStream
from .utils import format_metric, mean_std, stream_id

log = logging.getLogger(__name__)

DATASET_MAGIC = b'MCVAEDS\x00'
DATASET_VERSION = 1
_DATASET_HEADER = struct.Struct('<8sIQQ')

CHECKPOINT_HEADER = '# mcmc_vae checkpoint 1'

DESK_SCALE = 10

# Schema: section -> key -> (type, default). A tuple type lists the choices.
SCHEMA = {
    'data': {
        'kind': (('synthetic-linear', 'synthetic-nonlinear', 'file'), 'synthetic-linear'),
        'n1': (int, 10),
        'n2': (int, 20),
        'dx': (int, 40),
        'n': (int, 1000),
        'obs_sigma': (float, 0.5),
        'gen_seed': (int, 1),
        'hidden': (int, 32),
        'path': (str, None),
        'truth_path': (str, None),
    },
    'model': {
        'kind': (('linear-hvae', 'mlp-hvae', 'mlp-vae'), 'linear-hvae'),
        'n1': (int, None),
        'n2': (int, None),
        'hidden': (int, 32),
        'likelihood': (('gaussian', 'bernoulli'), 'gaussian'),
        'obs_sigma': (float, 0.5),
    },
    'train': {
        'variant': (str, None),
        'kernel': (training.KERNEL_KINDS, 'hmc'),
        'preconditioner': (training.PRECONDITIONER_KINDS, 'lower-triangular'),
        'adaptation': (training.ADAPTATION_KINDS, 'speed-measure'),
        'optimizer': (training.OPTIMIZER_KINDS, 'adam'),
        'lr_phi0': (float, 1e-3),
        'lr_phi1': (float, 1e-3),
        'lr_theta': (float, 1e-3),
        'lr_beta': (float, 1e-2),
        'K': (int, 2),
        'leapfrog_L': (int, 2),
        'pretrain_epochs': (int, 10),
        'mcmc_epochs': (int, 10),
        'batch_size': (int, 50),
        'alpha_star': (float, None),
        'init_log_h': (float, -2.0),
        'init_scale': (float, 1.0),
        'beta0': (float, 1.0),
        'freeze_prior_during_mcmc': (bool, False),
        'seed': (int, 0),
        'seeds': (int, 1),
    },
    'eval': {
        'S': (int, 1000),
        'tau': (float, 1.5),
        'proposal_mode': (evaluation.PROPOSAL_MODES, 'encoder-mean'),
        'chain_steps': (int, 10),
        'n_points': (int, 100),
    },
    'output': {
        'dir': (str, 'runs/default'),
    },
}

VARIANTS = {
    'hvae': ('none', 'none', 'fixed'),
    'gradmala-d': ('mala', 'diagonal', 'speed-measure'),
    'dsmala-d': ('mala', 'diagonal', 'dual-averaging'),
    'gradhmc-d': ('hmc', 'diagonal', 'speed-measure'),
    'dshmc-d': ('hmc', 'diagonal', 'dual-averaging'),
    'gradmala-lt': ('mala', 'lower-triangular', 'speed-measure'),
    'gradhmc-lt': ('hmc', 'lower-triangular', 'speed-measure'),
}


def _linear_preset(n1, n2, dx, epochs, k, variant, name):
    return {
        'data': {'kind': 'synthetic-linear', 'n1': n1, 'n2': n2, 'dx': dx,
                 'n': 1000, 'obs_sigma': 0.5, 'gen_seed': 1},
        'model': {'kind': 'linear-hvae'},
        'train': {'variant': variant, 'K': k,
                  'pretrain_epochs': epochs // DESK_SCALE,
                  'mcmc_epochs': epochs // DESK_SCALE,
                  'lr_phi0': 1e-3, 'lr_phi1': 1e-3, 'lr_theta': 1e-3,
                  'seeds': 3},
        'eval': {'S': 1000, 'tau': 1.5, 'n_points': 100},
        'output': {'dir': 'runs/' + name},
    }


PRESETS = {
    'linear-10-20-lt-hmc': _linear_preset(10, 20, 40, 1000, 2, 'gradhmc-lt',
                                          'linear-10-20-lt-hmc'),
    'linear-10-20-lt-mala': _linear_preset(10, 20, 40, 1000, 2, 'gradmala-lt',
                                           'linear-10-20-lt-mala'),
    'linear-10-20-diag-hmc': _linear_preset(10, 20, 40, 1000, 2, 'gradhmc-d',
                                            'linear-10-20-diag-hmc'),
    'linear-10-20-baseline': _linear_preset(10, 20, 40, 1000, 2, 'hvae',
                                            'linear-10-20-baseline'),
    # slow: several hours on one core
    'linear-50-100-lt-hmc': _linear_preset(50, 100, 200, 5000, 10, 'gradhmc-lt',
                                           'linear-50-100-lt-hmc'),
    'nonlinear-5-10-smoke': {
        'data': {'kind': 'synthetic-nonlinear', 'n1': 5, 'n2': 10, 'dx': 20,
                 'n': 500, 'obs_sigma': 0.5, 'gen_seed': 1, 'hidden': 32},
        'model': {'kind': 'mlp-hvae', 'hidden': 32, 'obs_sigma': 0.5},
        'train': {'variant': 'gradhmc-lt', 'K': 2,
                  'pretrain_epochs': 190 // DESK_SCALE,
                  'mcmc_epochs': 10 // DESK_SCALE,
                  'freeze_prior_during_mcmc': True, 'seeds': 1},
        'eval': {'S': 100, 'tau': 1.5, 'n_points': 20},
        'output': {'dir': 'runs/nonlinear-5-10-smoke'},
    },
}


@dataclass
class DataSpec:
    kind: str = 'synthetic-linear'
    n1: int = 10
    n2: int = 20
    dx: int = 40
    n: int = 1000
    obs_sigma: float = 0.5
    gen_seed: int = 1
    hidden: int = 32
    path: str = None
    truth_path: str = None


@dataclass
class ModelSpec:
    kind: str = 'linear-hvae'
    n1: int = None
    n2: int = None
    hidden: int = 32
    likelihood: str = 'gaussian'
    obs_sigma: float = 0.5


@dataclass
class ExperimentConfig:
    data: DataSpec
    model: ModelSpec
    train: training.TrainConfig
    eval: evaluation.ISConfig
    n_points: int = 100
    output_dir: str = 'runs/default'
    seeds: int = 1
    variant: str = None
    sections: dict = field(default_factory=dict)


# Configuration ----------------------------------------------------------

def _coerce(kind, value, key, lineno):
    if isinstance(kind, tuple):
        if value not in kind:
            raise ConfigError("%s must be one of %s, got '%s'"
                              % (key, ', '.join(kind), value), lineno, key)
        return value
    if kind is bool:
        if not isinstance(value, bool):
            raise ConfigError("%s expects true or false" % key, lineno, key)
        return value
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError("%s expects an integer, got %r" % (key, value), lineno, key)
        return value
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError("%s expects a number, got %r" % (key, value), lineno, key)
        return float(value)
    if not isinstance(value, str):
        raise ConfigError("%s expects a string, got %r" % (key, value), lineno, key)
    return value


def config_from_parsed(parsed):
    """Validate ``{section: {key: (value, line)}}`` into an ExperimentConfig."""
    typed = {}
    lines = {}
    for section, entries in parsed.items():
        if section not in SCHEMA:
            first = min((ln for _, ln in entries.values() if ln), default=None)
            raise ConfigError("unknown section [%s]" % section, first)
        typed[section] = {}
        for key, (value, lineno) in entries.items():
            if key not in SCHEMA[section]:
                raise ConfigError("unknown key '%s.%s'" % (section, key),
                                  lineno, key)
            kind, _ = SCHEMA[section][key]
            typed[section][key] = _coerce(kind, value, key, lineno)
            lines[key] = lineno

    def get(section, key):
        return typed.get(section, {}).get(key, SCHEMA[section][key][1])

    def spec(section):
        return {key: get(section, key) for key in SCHEMA[section]}

    train = spec('train')
    variant = train.pop('variant')
    seeds = train.pop('seeds')
    if variant is not None:
        if variant not in VARIANTS:
            raise ConfigError("unknown variant '%s' (known: %s)" % (
                variant, ', '.join(VARIANTS)), lines.get('variant'), 'variant')
        explicit = typed.get('train', {})
        for key, value in zip(('kernel', 'preconditioner', 'adaptation'),
                              VARIANTS[variant]):
            if key not in explicit:
                train[key] = value
    if seeds < 1:
        raise ConfigError("seeds must be at least 1", lines.get('seeds'), 'seeds')
    try:
        train_cfg = training.TrainConfig(**train)
    except ConfigError as e:
        raise ConfigError(str(e), lines.get(e.key), e.key)

    ev = spec('eval')
    n_points = ev.pop('n_points')
    try:
        eval_cfg = evaluation.ISConfig(**ev)
    except ValueError as e:
        raise ConfigError(str(e))

    data = DataSpec(**spec('data'))
    if data.kind == 'file' and not data.path:
        raise ConfigError("file datasets need data.path", lines.get('kind'), 'path')
    for key in ('n1', 'n2', 'dx', 'hidden'):
        if getattr(data, key) < 1:
            raise ConfigError("data.%s must be positive" % key, lines.get(key), key)
    if data.n < 0:
        raise ConfigError("data.n must not be negative", lines.get('n'), 'n')
    model = ModelSpec(**spec('model'))
    if model.n1 is None:
        model.n1 = data.n1
    if model.n2 is None:
        model.n2 = data.n2

    return ExperimentConfig(
        data=data, model=model, train=train_cfg, eval=eval_cfg,
        n_points=n_points, output_dir=get('output', 'dir'), seeds=seeds,
        variant=variant, sections=typed)


def config_from_values(sections):
    return config_from_parsed({
        section: {key: (value, None) for key, value in entries.items()}
        for section, entries in sections.items()})


def load_config(path=None, text=None, preset=None):
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError("unknown preset '%s' (known: %s)" % (
                preset, ', '.join(PRESETS)))
        return config_from_values(PRESETS[preset])
    if text is None:
        try:
            with open(path, 'r') as fp:
                text = fp.read()
        except OSError as e:
            raise IoError("cannot read %s: %s" % (path, e.strerror))
    return config_from_parsed(cfgparse.parse(text))


def with_overrides(cfg, overrides):
    """Copy of ``cfg`` with ``{'section.key': value}`` applied."""
    sections = {s: dict(v) for s, v in cfg.sections.items()}
    for dotted, value in overrides.items():
        section, _, key = dotted.partition('.')
        if section not in SCHEMA or key not in SCHEMA[section]:
            raise ConfigError("unknown key '%s'" % dotted, key=dotted)
        sections.setdefault(section, {})[key] = value
    return config_from_values(sections)


def dump_config(cfg):
    return cfgparse.emit(cfg.sections)


# Datasets and checkpoints -----------------------------------------------

def write_dataset(path, data):
    data = np.ascontiguousarray(data, dtype='<f8')
    if data.ndim != 2:
        raise IoError("dataset must be a matrix")
    try:
        with open(path, 'wb') as fp:
            fp.write(_DATASET_HEADER.pack(DATASET_MAGIC, DATASET_VERSION,
                                          data.shape[0], data.shape[1]))
            fp.write(data.tobytes())
    except OSError as e:
        raise IoError("cannot write %s: %s" % (path, e.strerror))


def read_dataset(path):
    try:
        with open(path, 'rb') as fp:
            blob = fp.read()
    except OSError as e:
        raise IoError("cannot read %s: %s" % (path, e.strerror))
    if len(blob) < _DATASET_HEADER.size:
        raise IoError("%s: truncated header" % path)
    magic, version, n, dx = _DATASET_HEADER.unpack_from(blob)
    if magic != DATASET_MAGIC:
        raise IoError("%s: not a dataset file" % path)
    if version != DATASET_VERSION:
        raise IoError("%s: unsupported version %d" % (path, version))
    body = blob[_DATASET_HEADER.size:]
    if len(body) != n * dx * 8:
        raise IoError("%s: body has %d bytes, expected %d" % (path, len(body), n * dx * 8))
    return np.frombuffer(body, dtype='<f8').reshape(n, dx).astype(np.float64)


def save_checkpoint(prefix, tensors, meta=None):
    """Write ``prefix.bin`` (raw '<f8') and its ``prefix.manifest``."""
    lines = [CHECKPOINT_HEADER]
    for key, value in sorted((meta or {}).items()):
        lines.append("meta %s %s" % (key, value))
    offset = 0
    chunks = []
    for name in sorted(tensors):
        value = np.asarray(tensors[name], dtype='<f8')
        shape = ','.join(str(s) for s in value.shape) or '-'
        value = value.reshape(-1)
        lines.append("tensor %s %s %d" % (name, shape, offset))
        chunks.append(value.tobytes())
        offset += value.size
    try:
        with open(prefix + '.bin', 'wb') as fp:
            fp.write(b''.join(chunks))
        with open(prefix + '.manifest', 'w') as fp:
            fp.write('\n'.join(lines) + '\n')
    except OSError as e:
        raise IoError("cannot write checkpoint %s: %s" % (prefix, e.strerror))


def load_checkpoint(prefix):
    try:
        with open(prefix + '.manifest', 'r') as fp:
            lines = fp.read().splitlines()
        with open(prefix + '.bin', 'rb') as fp:
            body = np.frombuffer(fp.read(), dtype='<f8')
    except OSError as e:
        raise IoError("cannot read checkpoint %s: %s" % (prefix, e.strerror))
    if not lines or lines[0] != CHECKPOINT_HEADER:
        raise IoError("%s.manifest: not a checkpoint manifest" % prefix)
    meta, tensors = {}, {}
    for lineno, line in enumerate(lines[1:], 2):
        parts = line.split()
        if not parts:
            continue
        if parts[0] == 'meta' and len(parts) >= 3:
            meta[parts[1]] = ' '.join(parts[2:])
        elif parts[0] == 'tensor' and len(parts) == 4:
            shape = () if parts[2] == '-' else tuple(int(s) for s in parts[2].split(','))
            offset = int(parts[3])
            size = int(np.prod(shape)) if shape else 1
            if offset + size > body.size:
                raise IoError("%s.manifest:%d: tensor exceeds body" % (prefix, lineno))
            tensors[parts[1]] = body[offset:offset + size].reshape(shape).copy()
        else:
            raise IoError("%s.manifest:%d: malformed line" % (prefix, lineno))
    return tensors, meta


def save_model(prefix, model, extra=None, meta=None):
    tensors = dict(model.state_tensors())
    tensors.update(extra or {})
    info = {'kind': model.kind, 'dx': model.dx}
    if hasattr(model, 'n1'):
        info.update(n1=model.n1, n2=model.n2)
    info.update(meta or {})
    save_checkpoint(prefix, tensors, info)


def load_truth(prefix):
    """Ground-truth linear model saved by :func:`generate_data`."""
    tensors, meta = load_checkpoint(prefix)
    if meta.get('kind') != LinearHVAE.kind:
        raise IoError("%s: truth checkpoint must hold a linear hVAE" % prefix)
    n1, n2, dx = int(meta['n1']), int(meta['n2']), int(meta['dx'])
    model = LinearHVAE.create(n1, n2, dx, RngStream(0), encoder=False)
    model.load_tensors(tensors)
    return model


# Operations -------------------------------------------------------------

def _truth_prefix(data_path):
    return os.path.splitext(data_path)[0] + '-truth'


def generate_data(spec, out_path):
    """Sample a ground-truth model and ``spec.n`` observations from it."""
    rng = RngStream(spec.gen_seed, stream_id('data'))
    if spec.kind == 'synthetic-nonlinear':
        truth = MlpHVAE.create(spec.n1, spec.n2, spec.dx, rng, hidden=spec.hidden,
                               obs_sigma=spec.obs_sigma)
    else:
        truth = LinearHVAE.create(spec.n1, spec.n2, spec.dx, rng,
                                  obs_sigma=spec.obs_sigma, encoder=False)
    data = truth.sample_data(rng, spec.n)
    write_dataset(out_path, data)
    save_model(_truth_prefix(out_path), truth)
    log.info("wrote %d observations to %s", spec.n, out_path)
    return data, truth


def prepare_data(cfg, out_dir):
    if cfg.data.kind == 'file':
        data = read_dataset(cfg.data.path)
        truth = load_truth(cfg.data.truth_path) if cfg.data.truth_path else None
        return data, truth
    data, truth = generate_data(cfg.data, os.path.join(out_dir, 'data.bin'))
    return data, truth if isinstance(truth, LinearHVAE) else None


def make_model(cfg, dx):
    rng = RngStream(cfg.train.seed, stream_id('init'))
    m = cfg.model
    return build_model(m.kind, m.n1, m.n2, dx, rng, hidden=m.hidden,
                       likelihood=m.likelihood, obs_sigma=m.obs_sigma)


def _ensure_dir(path):
    try:
        os.makedirs(path, exist_ok=True)
    except OSError as e:
        raise IoError("cannot create %s: %s" % (path, e.strerror))


def train_experiment(cfg, out_dir=None):
    out_dir = out_dir or cfg.output_dir
    _ensure_dir(out_dir)
    data, truth = prepare_data(cfg, out_dir)
    if data.shape[0] == 0:
        raise IoError("dataset is empty")
    model = make_model(cfg, data.shape[1])
    events = training.EventLog(os.path.join(out_dir, 'events.jsonl'))
    state, metrics = training.train(model, data, cfg.train, truth, events)
    training.write_metrics_csv(os.path.join(out_dir, 'metrics.csv'), metrics)
    extra, meta = {}, {}
    if state.phi1 is not None:
        extra = {'phi1/params': state.phi1.params(),
                 'phi1/beta': np.array(state.phi1.beta)}
        meta = {'kernel': state.phi1.kind, 'leapfrog_L': state.phi1.leapfrog_steps,
                'preconditioner': cfg.train.preconditioner}
    save_model(os.path.join(out_dir, 'final'), model, extra, meta)
    return model, state, data, truth


def _restore(cfg, out_dir):
    if cfg.data.kind == 'file':
        data, truth = prepare_data(cfg, out_dir)
    else:
        data_path = os.path.join(out_dir, 'data.bin')
        data = read_dataset(data_path)
        truth = None
        if cfg.data.kind == 'synthetic-linear':
            truth = load_truth(_truth_prefix(data_path))
    model = make_model(cfg, data.shape[1])
    tensors, _ = load_checkpoint(os.path.join(out_dir, 'final'))
    model.load_tensors(tensors)
    kernel = training.init_kernel(cfg.train, model.latent_dim)
    if kernel is not None and 'phi1/params' in tensors:
        kernel = replace(kernel.with_params(tensors['phi1/params']),
                         beta=float(tensors['phi1/beta']))
    return model, kernel, data, truth


def evaluate_experiment(cfg, out_dir=None, model=None, kernel=None, data=None,
                        truth=None):
    out_dir = out_dir or cfg.output_dir
    if model is None:
        model, kernel, data, truth = _restore(cfg, out_dir)
    points = data[:cfg.n_points] if cfg.n_points > 0 else data
    is_cfg = cfg.eval
    if is_cfg.proposal_mode == 'chain-mean' and kernel is None:
        raise ConfigError("chain-mean proposals need an MCMC kernel", key='proposal_mode')
    estimates = evaluation.evidence_estimates(model, points, is_cfg, cfg.train.seed, kernel)
    kappa_raw = kappa_t = gap = gap_abs = None
    if isinstance(model, LinearHVAE):
        precond = None
        if kernel is not None and cfg.train.preconditioner != 'none':
            precond = kernel.precond.matrix()
        kappa_raw, kappa_t = evaluation.condition_diagnostics(
            model, precond, cfg.train.adaptation if kernel is not None else None)
        if truth is not None:
            gap, gap_abs = evaluation.loglik_gap(truth, model, data)
    report = evaluation.evaluation_report(
        dataset=cfg.data.path if cfg.data.kind == 'file' else cfg.data.kind,
        model=cfg.model.kind, kernel=cfg.train.kernel,
        adaptation=cfg.train.adaptation, kappa_raw=kappa_raw,
        kappa_transformed=kappa_t, gap_mean=gap, gap_abs=gap_abs,
        is_loglik_mean=float(np.mean(estimates)) if len(estimates) else None,
        S=is_cfg.S, tau=is_cfg.tau, seed=cfg.train.seed)
    evaluation.write_report(os.path.join(out_dir, 'evaluation.json'), report)
    return report


def run(cfg, out_dir=None):
    """Generate or load data, train, evaluate; returns the report."""
    out_dir = out_dir or cfg.output_dir
    model, state, data, truth = train_experiment(cfg, out_dir)
    return evaluate_experiment(cfg, out_dir, model, state.phi1, data, truth)


# Sweeps -----------------------------------------------------------------

SUMMARY_METRICS = ('kappa_raw', 'kappa_transformed', 'gap_mean', 'gap_abs',
                   'is_loglik_mean')


def _run_cell(sections, out_dir):
    try:
        cfg = config_from_values(sections)
        _ensure_dir(out_dir)
        with open(os.path.join(out_dir, 'config.cfg'), 'w') as fp:
            fp.write(cfgparse.emit(sections))
        return run(cfg, out_dir), None
    except (McmcVaeError, OSError) as e:
        return None, "%s: %s" % (type(e).__name__, e)


def _cell_dir_name(axis, value):
    text = ','.join(str(v) for v in value) if isinstance(value, list) else str(value)
    return "%s=%s" % (axis, text.replace(os.sep, '_'))


def sweep(cfg, axis, values, out_dir=None, jobs=1):
    """One run per (value, seed) and a ``summary.csv`` across values."""
    section, _, key = axis.partition('.')
    if section not in SCHEMA or key not in SCHEMA[section]:
        raise ConfigError("unknown sweep axis '%s'" % axis, key=axis)
    out_dir = out_dir or cfg.output_dir
    _ensure_dir(out_dir)
    cells = []
    for value in values:
        for s in range(cfg.seeds):
            sections = {sec: dict(v) for sec, v in cfg.sections.items()}
            sections.setdefault(section, {})[key] = value
            seed = stream_id(cfg.train.seed, axis, str(value), s) % (2 ** 31)
            sections.setdefault('train', {})['seed'] = seed
            # validate before any process is started
            config_from_values(sections)
            cells.append((value, s, sections, os.path.join(
                out_dir, _cell_dir_name(axis, value), 'seed-%d' % s)))

    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_cell, [c[2] for c in cells],
                                    [c[3] for c in cells]))
    else:
        results = [_run_cell(c[2], c[3]) for c in cells]

    rows = []
    for value in values:
        reports, failed = [], 0
        for (v, s, _, path), (report, error) in zip(cells, results):
            if v != value:
                continue
            if report is None:
                failed += 1
                log.warning("cell %s seed %d failed: %s", path, s, error)
            else:
                reports.append(report)
        row = {'value': value, 'runs': len(reports), 'failed': failed}
        for metric in SUMMARY_METRICS:
            vals = [r[metric] for r in reports if r.get(metric) is not None]
            row[metric + '_mean'], row[metric + '_std'] = mean_std(vals)
        rows.append(row)
    write_summary(os.path.join(out_dir, 'summary.csv'), axis, rows)
    return rows


def write_summary(path, axis, rows):
    columns = ['value', 'runs', 'failed']
    for metric in SUMMARY_METRICS:
        columns += [metric + '_mean', metric + '_std']
    with open(path, 'w', newline='') as fp:
        writer = csv.writer(fp, lineterminator='\n')
        writer.writerow([axis] + columns[1:])
        for row in rows:
            writer.writerow([format_metric(row[c]) if c != 'value'
                             else cfgwrite.gen_value(row[c]) for c in columns])
