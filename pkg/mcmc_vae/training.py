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
"""ELBO pretraining followed by MCMC-augmented training.

One MCMC training step on a batch

1. draws ``z₀`` from the encoder and ascends the ELBO in φ₀,
2. runs ``K`` kernel steps from ``z₀`` accumulating the speed-measure
   gradient in φ₁ and the acceptance count,
3. ascends ``log p(x|z_K) + log p(z_K)`` in θ with ``z_K`` held fixed,
4. moves β towards the target acceptance rate.

All gradients are batch means and every update ascends.
"""

import csv
import json
import logging
from dataclasses import dataclass, field, replace

import numpy as np

from . import evaluation
from . import kernels
from .autodiff import Tape
from .errors import (ConfigError, DivergentTrajectory, McmcVaeError,
                     NonFiniteGradient, NonFiniteLoss, ShapeMismatch,
                     SingularJacobian)
from .models import LinearHVAE
from .numerics import RngStream
from .utils import format_metric, stream_id

log = logging.getLogger(__name__)

KERNEL_KINDS = ('mala', 'hmc', 'none')
PRECONDITIONER_KINDS = ('diagonal', 'lower-triangular', 'none')
ADAPTATION_KINDS = ('speed-measure', 'dual-averaging', 'fixed')
OPTIMIZER_KINDS = ('sgd', 'adam')

MAX_CONSECUTIVE_FAILURES = 10

METRIC_COLUMNS = ('epoch', 'phase', 'elbo', 'accept_rate', 'beta', 'log_h',
                  'delta_loglik', 'kappa_raw', 'kappa_transformed')


@dataclass
class TrainConfig:
    lr_phi0: float = 1e-3
    lr_phi1: float = 1e-3
    lr_theta: float = 1e-3
    lr_beta: float = 1e-2
    K: int = 2
    leapfrog_L: int = 2
    pretrain_epochs: int = 0
    mcmc_epochs: int = 0
    batch_size: int = 50
    alpha_star: float = None
    seed: int = 0
    kernel: str = 'hmc'
    preconditioner: str = 'lower-triangular'
    adaptation: str = 'speed-measure'
    optimizer: str = 'adam'
    init_log_h: float = -2.0
    init_scale: float = 1.0
    beta0: float = 1.0
    freeze_prior_during_mcmc: bool = False

    def __post_init__(self):
        for name in ('lr_phi0', 'lr_phi1', 'lr_theta', 'lr_beta', 'init_scale', 'beta0'):
            if not getattr(self, name) > 0.0:
                raise ConfigError("%s must be positive" % name, key=name)
        for name in ('pretrain_epochs', 'mcmc_epochs', 'K'):
            if getattr(self, name) < 0:
                raise ConfigError("%s must not be negative" % name, key=name)
        if self.batch_size < 1:
            raise ConfigError("batch_size must be at least 1", key='batch_size')
        if self.leapfrog_L < 1:
            raise ConfigError("leapfrog_L must be at least 1", key='leapfrog_L')
        for name, kinds in (('kernel', KERNEL_KINDS),
                            ('preconditioner', PRECONDITIONER_KINDS),
                            ('adaptation', ADAPTATION_KINDS),
                            ('optimizer', OPTIMIZER_KINDS)):
            if getattr(self, name) not in kinds:
                raise ConfigError("%s must be one of %s, got '%s'" % (
                    name, ', '.join(kinds), getattr(self, name)), key=name)
        if self.alpha_star is not None and not 0.0 < self.alpha_star < 1.0:
            raise ConfigError("alpha_star must lie in (0, 1)", key='alpha_star')

    @property
    def uses_mcmc(self):
        return self.kernel != 'none'


# Optimizers -------------------------------------------------------------

def _check_shapes(params, grads):
    for name, g in grads.items():
        if np.shape(g) != np.shape(params[name]):
            raise ShapeMismatch("gradient for %s has shape %s, expected %s" % (
                name, np.shape(g), np.shape(params[name])))


class Sgd:
    def __init__(self, lr):
        self.lr = lr

    def update(self, params, grads):
        _check_shapes(params, grads)
        return {name: params[name] + self.lr * g for name, g in grads.items()}


class Adam:
    """Bias-corrected moment scaling; ascends the objective."""

    def __init__(self, lr, b1=0.9, b2=0.999, eps=1e-8):
        self.lr, self.b1, self.b2, self.eps = lr, b1, b2, eps
        self.m = {}
        self.v = {}
        self.t = {}

    def update(self, params, grads):
        _check_shapes(params, grads)
        out = {}
        for name, g in grads.items():
            g = np.asarray(g, dtype=np.float64)
            t = self.t.get(name, 0) + 1
            m = self.b1 * self.m.get(name, 0.0) + (1.0 - self.b1) * g
            v = self.b2 * self.v.get(name, 0.0) + (1.0 - self.b2) * g * g
            self.t[name], self.m[name], self.v[name] = t, m, v
            m_hat = m / (1.0 - self.b1 ** t)
            v_hat = v / (1.0 - self.b2 ** t)
            out[name] = params[name] + self.lr * m_hat / (np.sqrt(v_hat) + self.eps)
        return out


def make_optimizer(kind, lr):
    if kind == 'sgd':
        return Sgd(lr)
    if kind == 'adam':
        return Adam(lr)
    raise ValueError("unknown optimizer '%s'" % kind)


def optimizer_apply(params, grads, kind, lr, state=None):
    """One ascent step on a dict of tensors; ``state`` carries Adam moments."""
    opt = state if state is not None else make_optimizer(kind, lr)
    new = dict(params)
    new.update(opt.update(params, grads))
    return new


def _apply_to_store(opt, store, grads):
    for name, value in opt.update(store.values, grads).items():
        store[name] = value


# State ------------------------------------------------------------------

@dataclass
class ChainRecord:
    step: int
    accepted: np.ndarray
    log_alpha: np.ndarray
    log_r: np.ndarray
    energy_error: np.ndarray

    @classmethod
    def from_output(cls, step, out):
        return cls(step, np.atleast_1d(out.accepted), np.atleast_1d(out.log_alpha),
                   np.atleast_1d(out.log_r_forward), np.atleast_1d(out.energy_error))


@dataclass
class TrainState:
    theta: object
    phi0: object
    phi1: kernels.KernelParams = None
    step: int = 0
    accept_count: int = 0
    proposal_count: int = 0
    dual: kernels.DualAveragingState = None
    optimizers: dict = field(default_factory=dict)

    @property
    def beta(self):
        return None if self.phi1 is None else self.phi1.beta

    @property
    def accept_rate(self):
        if self.proposal_count == 0:
            return float('nan')
        return self.accept_count / self.proposal_count


def init_kernel(config, dim):
    if not config.uses_mcmc:
        return None
    log_h = config.init_log_h
    scale = config.init_scale
    if config.kernel == 'hmc' and config.adaptation == 'speed-measure' \
            and config.preconditioner != 'none':
        # the step size lives in the preconditioner
        scale, log_h = scale * np.exp(log_h), 0.0
    return kernels.KernelParams(
        kind=config.kernel,
        precond=kernels.make_preconditioner(config.preconditioner, dim, scale),
        log_h=log_h, leapfrog_steps=config.leapfrog_L, beta=config.beta0,
        target_accept=config.alpha_star)


def init_state(model, config):
    state = TrainState(model.theta, model.phi0, init_kernel(config, model.latent_dim))
    state.optimizers = {
        'theta': make_optimizer(config.optimizer, config.lr_theta),
        'phi0': make_optimizer(config.optimizer, config.lr_phi0),
        'phi1': make_optimizer(config.optimizer, config.lr_phi1),
    }
    if state.phi1 is not None and config.adaptation == 'dual-averaging':
        state.dual = kernels.init_dual_averaging(state.phi1.log_h)
    return state


def _finite(grads):
    return all(np.all(np.isfinite(g)) for g in grads.values())


def _elbo_gradients(model, x, rng):
    """Batch-mean ELBO, its gradients and the detached encoder draw."""
    x = np.atleast_2d(x)
    eps = rng.normal((x.shape[0], model.latent_dim))
    theta, phi0 = model.theta.copy(), model.phi0.copy()
    tape = Tape()
    rows, z = model.elbo(tape, theta.attach(tape), phi0.attach(tape), x, eps)
    objective = tape.scale_shift(tape.sum(rows), 1.0 / x.shape[0])
    if not np.isfinite(objective.value):
        raise NonFiniteLoss("ELBO estimate is not finite")
    tape.backward(objective)
    if not (_finite(theta.grads) and _finite(phi0.grads)):
        raise NonFiniteLoss("ELBO gradient is not finite")
    return float(objective.value), theta.grads, phi0.grads, z.value


def elbo_step(model, state, x, rng, config):
    """One ELBO ascent step on θ and φ₀; returns the ELBO estimate."""
    elbo, g_theta, g_phi0, _ = _elbo_gradients(model, x, rng)
    _apply_to_store(state.optimizers['theta'], model.theta, g_theta)
    _apply_to_store(state.optimizers['phi0'], model.phi0, g_phi0)
    state.step += 1
    return elbo


def mcmc_training_step(model, state, x, rng, config):
    """One MCMC-augmented step; returns the ELBO estimate and chain records."""
    x = np.atleast_2d(x)
    batch = x.shape[0]
    elbo, _, g_phi0, z = _elbo_gradients(model, x, rng)
    k = state.phi1
    potential = model.posterior_potential(x)
    g_phi1 = np.zeros(k.n_params)
    accepted = 0
    records = []
    for i in range(config.K):
        out = kernels.mh_step(z, potential, k, rng)
        accepted += out.accept_count
        if config.adaptation == 'speed-measure':
            g_phi1 += kernels.speed_measure_grad_contrib(out, z, potential, k)
        records.append(ChainRecord.from_output(i, out))
        z = out.next_state

    g_theta = potential.theta_grad(z)
    if config.freeze_prior_during_mcmc:
        for name in model.prior_names:
            g_theta.pop(name, None)
    g_theta = {name: g / batch for name, g in g_theta.items()}
    g_phi1 = g_phi1 / batch
    if not (_finite(g_theta) and np.all(np.isfinite(g_phi1))):
        raise DivergentTrajectory("chain produced non-finite gradients")

    _apply_to_store(state.optimizers['phi0'], model.phi0, g_phi0)
    _apply_to_store(state.optimizers['theta'], model.theta, g_theta)
    if config.adaptation == 'speed-measure' and k.n_params:
        new = state.optimizers['phi1'].update({'phi1': k.params()}, {'phi1': g_phi1})
        k = k.with_params(new['phi1'])
        if k.kind == kernels.HMC:
            k = replace(k, log_h=state.phi1.log_h)
    proposals = batch * config.K
    if config.K > 0:
        if config.adaptation == 'speed-measure':
            k = replace(k, beta=kernels.beta_update(
                k.beta, accepted, proposals, k.target_accept, config.lr_beta))
        elif config.adaptation == 'dual-averaging':
            state.dual = kernels.dual_averaging_update(
                state.dual, accepted / proposals, k.target_accept)
            k = replace(k, log_h=state.dual.log_h)
    state.phi1 = k
    state.accept_count += accepted
    state.proposal_count += proposals
    state.step += 1
    return elbo, records


def finalize_state(state):
    """Freeze the averaged dual-averaging step size for evaluation."""
    if state.dual is not None and state.phi1 is not None:
        state.phi1 = replace(state.phi1, log_h=state.dual.log_h_avg)
    return state


# Metrics ----------------------------------------------------------------

@dataclass
class EpochMetrics:
    epoch: int
    phase: str
    elbo: float
    accept_rate: float = None
    beta: float = None
    log_h: float = None
    delta_loglik: float = None
    kappa_raw: float = None
    kappa_transformed: float = None

    def row(self):
        return [format_metric(getattr(self, c)) for c in METRIC_COLUMNS]


def write_metrics_csv(path, metrics):
    with open(path, 'w', newline='') as fp:
        writer = csv.writer(fp, lineterminator='\n')
        writer.writerow(METRIC_COLUMNS)
        for m in metrics:
            writer.writerow(m.row())


class EventLog:
    """JSON-lines record of skipped steps."""

    def __init__(self, path=None):
        self.path = path
        self.events = []
        if path is not None:
            open(path, 'w').close()

    def emit(self, **event):
        self.events.append(event)
        if self.path is not None:
            with open(self.path, 'a') as fp:
                fp.write(json.dumps(event, sort_keys=True) + '\n')


def _analytic_metrics(metrics, model, truth, data, state, config):
    if not isinstance(model, LinearHVAE):
        return
    if truth is not None:
        metrics.delta_loglik = evaluation.loglik_gap(truth, model, data)[0]
    precond = None
    if state.phi1 is not None and config.preconditioner != 'none':
        precond = state.phi1.precond.matrix()
    try:
        metrics.kappa_raw, metrics.kappa_transformed = evaluation.condition_diagnostics(
            model, precond, config.adaptation)
    except McmcVaeError as e:
        log.warning("condition diagnostics unavailable: %s", e)


def _run_epoch(model, state, data, config, epoch, phase, events, failures):
    n = data.shape[0]
    order = RngStream(config.seed, stream_id('epoch', epoch)).permutation(n)
    elbos = []
    accepted_before = state.accept_count
    proposed_before = state.proposal_count
    for start in range(0, n, config.batch_size):
        x = data[order[start:start + config.batch_size]]
        rng = RngStream(config.seed, stream_id('step', state.step))
        try:
            if phase == 'mcmc' and config.uses_mcmc:
                elbo, _ = mcmc_training_step(model, state, x, rng, config)
            else:
                elbo = elbo_step(model, state, x, rng, config)
        except (NonFiniteLoss, NonFiniteGradient, DivergentTrajectory,
                SingularJacobian) as e:
            failures += 1
            log.warning("step %d skipped: %s", state.step, e)
            events.emit(step=state.step, epoch=epoch, phase=phase,
                        kind=type(e).__name__, message=str(e))
            state.step += 1
            if failures >= MAX_CONSECUTIVE_FAILURES:
                raise
            continue
        failures = 0
        elbos.append(elbo)
    metrics = EpochMetrics(epoch, phase, float(np.mean(elbos)) if elbos else float('nan'))
    if state.phi1 is not None and phase == 'mcmc':
        proposals = state.proposal_count - proposed_before
        if proposals:
            metrics.accept_rate = (state.accept_count - accepted_before) / proposals
        metrics.beta = state.phi1.beta
        metrics.log_h = state.phi1.log_h
    return metrics, failures


def train(model, data, config, truth=None, events=None):
    """Pretrain on the ELBO, then train with MCMC; returns (state, metrics)."""
    data = np.asarray(data, dtype=np.float64)
    if data.ndim != 2 or data.shape[0] == 0:
        raise ValueError("training needs a nonempty (N, dx) dataset")
    events = events if events is not None else EventLog()
    state = init_state(model, config)
    metrics = []
    failures = 0
    phases = [('pretrain', config.pretrain_epochs), ('mcmc', config.mcmc_epochs)]
    epoch = 0
    for phase, count in phases:
        for _ in range(count):
            m, failures = _run_epoch(model, state, data, config, epoch, phase,
                                     events, failures)
            _analytic_metrics(m, model, truth, data, state, config)
            log.info("epoch %d %s: elbo %.4f accept %s beta %s log_h %s", epoch, phase,
                     m.elbo, format_metric(m.accept_rate), format_metric(m.beta),
                     format_metric(m.log_h))
            metrics.append(m)
            epoch += 1
    return finalize_state(state), metrics
