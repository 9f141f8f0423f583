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
"""Importance-sampling evidence estimates and linear-model diagnostics.

Each data row gets its own random stream, so estimates do not depend on
the order rows are evaluated in.
"""

import json
import logging
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from . import kernels
from .errors import DegenerateProposal, UnsupportedLikelihood
from .numerics import RngStream, cholesky, condition_number, gaussian_logpdf
from .utils import stream_id

log = logging.getLogger(__name__)

PROPOSAL_MODES = ('encoder-mean', 'chain-mean', 'exact-posterior')


@dataclass
class ISConfig:
    S: int = 1000
    tau: float = 1.5
    proposal_mode: str = 'encoder-mean'
    chain_steps: int = 10

    def __post_init__(self):
        if self.S < 1:
            raise ValueError("S must be at least 1")
        if not self.tau >= 1.0:
            raise ValueError("tau must be at least 1")
        if self.proposal_mode not in PROPOSAL_MODES:
            raise ValueError("unknown proposal mode '%s'" % self.proposal_mode)


def log_mean_exp(log_w, axis=None):
    log_w = np.asarray(log_w, dtype=np.float64)
    n = log_w.size if axis is None else log_w.shape[axis]
    return logsumexp(log_w, axis=axis) - np.log(n)


def chain_posterior_mean(model, x, kernel, steps, rng):
    """Average of the last half of a chain started at the encoder mean."""
    mean, _ = model.encoder_moments(x)
    potential = model.posterior_potential(x)
    z = mean
    keep = max(1, steps // 2)
    tail = []
    for i in range(steps):
        z = kernels.mh_step(z, potential, kernel, rng).next_state
        if i >= steps - keep:
            tail.append(z)
    return np.mean(tail, axis=0) if tail else mean


def proposal_moments(model, x, cfg, rng=None, kernel=None):
    """Mean and covariance factor of the importance proposal at ``x``."""
    if cfg.proposal_mode == 'exact-posterior':
        if not hasattr(model, 'posterior_moments'):
            raise UnsupportedLikelihood("exact posterior needs a linear model")
        mean, cov = model.posterior_moments(x)
        return mean, cholesky(cov).matrix()
    mean, scale = model.encoder_moments(x)
    if np.any(~np.isfinite(scale)) or np.any(scale <= 0.0):
        raise DegenerateProposal("encoder scale must be positive")
    if cfg.proposal_mode == 'chain-mean':
        if kernel is None:
            raise ValueError("chain-mean proposals need a kernel")
        mean = chain_posterior_mean(model, x, kernel, cfg.chain_steps, rng)
    return mean, np.diag(scale)


def importance_sampling_loglik(model, x, cfg, rng, kernel=None, proposal=None):
    """log (1/S) Σ p(x, z_s) / r(z_s) with z_s drawn from the proposal.

    ``proposal`` overrides the configured mode with an explicit
    ``(mean, cov_factor)``. The proposal covariance is scaled by ``tau``.
    """
    x = np.asarray(x, dtype=np.float64)
    if proposal is None:
        proposal = proposal_moments(model, x, cfg, rng, kernel)
    mean, factor = proposal
    factor = np.sqrt(cfg.tau) * np.asarray(factor, dtype=np.float64)
    diag = np.diag(factor)
    if np.any(~np.isfinite(factor)) or np.any(diag <= 0.0):
        raise DegenerateProposal("proposal scale must be positive")
    z = mean + rng.normal((cfg.S, mean.shape[0])) @ factor.T
    xs = np.broadcast_to(x, (cfg.S, x.shape[0]))
    log_w = model.log_joint_np(xs, z) - gaussian_logpdf(z, mean, factor)
    return float(log_mean_exp(log_w))


def evidence_estimates(model, data, cfg, seed, kernel=None):
    """Importance-sampling estimate for every row, one stream per row."""
    return np.array([
        importance_sampling_loglik(model, x, cfg, RngStream(seed, stream_id('is', i)),
                                   kernel)
        for i, x in enumerate(np.atleast_2d(data))])


def condition_diagnostics(model, precond=None, adaptation=None):
    """Condition numbers of the posterior precision before and after ``precond``.

    The transformed number is ``None`` without a preconditioner and equals
    the raw one under dual averaging, which learns no preconditioner.
    """
    prec = model.posterior_precision()
    kappa_raw = condition_number(prec)
    if adaptation == 'dual-averaging':
        return kappa_raw, kappa_raw
    if precond is None:
        return kappa_raw, None
    c = np.asarray(precond, dtype=np.float64)
    return kappa_raw, condition_number(c.T @ prec @ c)


def loglik_gap(model_true, model_est, data):
    """Signed mean of log p_true(x) - log p_est(x) and its absolute value."""
    data = np.atleast_2d(data)
    gap = float(np.mean(model_true.marginal_loglik(data)
                        - model_est.marginal_loglik(data)))
    return gap, abs(gap)


REPORT_FIELDS = ('dataset', 'model', 'kernel', 'adaptation', 'kappa_raw',
                 'kappa_transformed', 'gap_mean', 'gap_abs', 'is_loglik_mean',
                 'S', 'tau', 'seed')


def evaluation_report(**fields):
    unknown = set(fields) - set(REPORT_FIELDS)
    if unknown:
        raise ValueError("unknown report fields: %s" % ', '.join(sorted(unknown)))
    return {name: fields.get(name) for name in REPORT_FIELDS}


def write_report(path, report):
    with open(path, 'w') as fp:
        json.dump(report, fp, indent=4, sort_keys=True)
        fp.write('\n')
