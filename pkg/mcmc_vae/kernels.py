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
"""Reparameterizable Metropolis-Hastings kernels and their adaptation.

Both kernels run the same leapfrog recursion in whitened momentum
coordinates ``u = Sᵀp`` with scale matrix ``S = h·C``::

    m_l     = u_l - ½ Sᵀ ∇U(q_l)
    q_{l+1} = q_l + S m_l
    u_{l+1} = m_l - ½ Sᵀ ∇U(q_{l+1})

MALA is the single step ``L = 1``. For HMC the step size stays at
``h = 1`` unless dual averaging moves it, so the preconditioner carries
the scale. States are vectors ``(d,)`` or stacks of independent chains
``(B, d)``.
"""

import logging
from dataclasses import dataclass, field, replace

import numpy as np
from numpy.polynomial import Polynomial
from scipy.linalg import solve_triangular

from .errors import (DimensionMismatch, DivergentTrajectory,
                     NonFiniteGradient, SingularJacobian)
from .numerics import LOG_2PI, LowerTriangularFactor, gaussian_logpdf

log = logging.getLogger(__name__)

MALA = 'mala'
HMC = 'hmc'

DEFAULT_TARGET_ACCEPT = {MALA: 0.574, HMC: 0.65}

BETA_FLOOR = 1e-8
SINGULAR_TOL = 1e-12


# Preconditioners --------------------------------------------------------

@dataclass
class DiagonalPreconditioner:
    """``C = diag(exp(log_scales))``."""

    log_scales: np.ndarray

    def __post_init__(self):
        self.log_scales = np.asarray(self.log_scales, dtype=np.float64).copy()

    @property
    def dim(self):
        return self.log_scales.shape[0]

    def diag(self):
        return np.exp(self.log_scales)

    def matrix(self):
        return np.diag(self.diag())

    def log_det(self):
        return float(np.sum(self.log_scales))

    def params(self):
        return self.log_scales.copy()

    def with_params(self, params):
        return DiagonalPreconditioner(params)

    def pullback(self, grad_matrix):
        return np.diag(grad_matrix) * self.diag()


@dataclass
class IdentityPreconditioner:
    """Fixed ``C = I``; carries no adaptable parameters."""

    size: int

    @property
    def dim(self):
        return self.size

    def diag(self):
        return np.ones(self.size)

    def matrix(self):
        return np.eye(self.size)

    def log_det(self):
        return 0.0

    def params(self):
        return np.zeros(0)

    def with_params(self, params):
        return self

    def pullback(self, grad_matrix):
        return np.zeros(0)


def make_preconditioner(kind, dim, scale=1.0):
    if kind == 'diagonal':
        return DiagonalPreconditioner(np.full(dim, np.log(scale)))
    if kind == 'lower-triangular':
        return LowerTriangularFactor.identity(dim, scale)
    if kind == 'none':
        return IdentityPreconditioner(dim)
    raise ValueError("unknown preconditioner '%s'" % kind)


# Parameters and outputs -------------------------------------------------

@dataclass
class KernelParams:
    """Adaptable kernel parameters φ₁ together with β and α*."""

    kind: str
    precond: object
    log_h: float = 0.0
    leapfrog_steps: int = 1
    beta: float = 1.0
    target_accept: float = None

    def __post_init__(self):
        if self.kind not in (MALA, HMC):
            raise ValueError("unknown kernel '%s'" % self.kind)
        if self.kind == MALA:
            self.leapfrog_steps = 1
        if int(self.leapfrog_steps) < 1:
            raise ValueError("leapfrog_L must be at least 1")
        self.leapfrog_steps = int(self.leapfrog_steps)
        if not self.beta > 0.0:
            raise ValueError("beta must be positive")
        if self.target_accept is None:
            self.target_accept = DEFAULT_TARGET_ACCEPT[self.kind]
        if not 0.0 < self.target_accept < 1.0:
            raise ValueError("target acceptance must lie in (0, 1)")

    @property
    def dim(self):
        return self.precond.dim

    @property
    def step_size(self):
        return float(np.exp(self.log_h))

    def scale_matrix(self):
        """``S = h·C``."""
        return self.step_size * self.precond.matrix()

    def log_det_scale(self):
        if self.step_size == 0.0:
            return -np.inf
        return self.dim * float(self.log_h) + self.precond.log_det()

    @property
    def n_params(self):
        return 1 + self.precond.params().shape[0]

    def params(self):
        return np.concatenate([[float(self.log_h)], self.precond.params()])

    def with_params(self, params):
        params = np.asarray(params, dtype=np.float64)
        if params.shape != (self.n_params,):
            raise DimensionMismatch("kernel expects %d parameters, got %s"
                                    % (self.n_params, params.shape))
        return replace(self, log_h=float(params[0]),
                       precond=self.precond.with_params(params[1:]))


@dataclass
class KernelOutput:
    next_state: np.ndarray
    proposed_state: np.ndarray
    accepted: np.ndarray
    log_alpha: np.ndarray
    log_r_forward: np.ndarray
    energy_error: np.ndarray
    noise: np.ndarray
    divergent: np.ndarray = None

    @property
    def accept_count(self):
        return int(np.sum(self.accepted))


@dataclass
class LeapfrogResult:
    positions: list
    initial_momentum: np.ndarray
    final_momentum: np.ndarray

    @property
    def proposal(self):
        return self.positions[-1]


@dataclass
class _Trajectory:
    positions: list
    grads: list
    half_momenta: list
    u: np.ndarray
    values: list = field(default_factory=list)


# Leapfrog core ----------------------------------------------------------

def _check_dims(z, k):
    z = np.asarray(z, dtype=np.float64)
    if z.shape[-1] != k.dim:
        raise DimensionMismatch("state has %d coordinates, kernel %d"
                                % (z.shape[-1], k.dim))
    return z


def _finite_grad(p, z):
    g = p.grad(z)
    if not np.all(np.isfinite(g)):
        raise NonFiniteGradient("gradient of the potential is not finite")
    return g


def _integrate(z, v, p, scale, steps):
    q = z
    g = p.grad(q)
    u = v
    traj = _Trajectory([q], [g], [], None)
    for _ in range(steps):
        m = u - 0.5 * g @ scale
        q = q + m @ scale.T
        g = p.grad(q)
        u = m - 0.5 * g @ scale
        traj.positions.append(q)
        traj.grads.append(g)
        traj.half_momenta.append(m)
    traj.u = u
    return traj


def _finite_rows(*arrays):
    ok = None
    for a in arrays:
        a = np.asarray(a)
        r = np.all(np.isfinite(a), axis=-1) if a.ndim > 0 else np.isfinite(a)
        ok = r if ok is None else ok & r
    return ok


def _standard_momentum(scale, u):
    # p = S⁻ᵀ u
    return solve_triangular(scale, np.atleast_2d(u).T, lower=True,
                            trans='T', check_finite=False).T.reshape(np.shape(u))


# MALA -------------------------------------------------------------------

def mala_propose(z, v, p, k):
    z = _check_dims(z, k)
    g = _finite_grad(p, z)
    h = k.step_size
    c = k.precond.matrix()
    return z - 0.5 * h ** 2 * ((g @ c) @ c.T) + h * (np.asarray(v) @ c.T)


def mala_energy_error(z, z_new, v, p, k):
    z = _check_dims(z, k)
    g = _finite_grad(p, z)
    g_new = _finite_grad(p, z_new)
    v = np.asarray(v, dtype=np.float64)
    c = k.precond.matrix()
    u = v - 0.5 * k.step_size * ((g + g_new) @ c)
    return p.value(z_new) - p.value(z) \
        - 0.5 * np.sum(v ** 2, axis=-1) + 0.5 * np.sum(u ** 2, axis=-1)


def mala_log_proposal_density(z, z_new, p, k):
    """log r(z, z') of the Gaussian MALA proposal at ``z``."""
    z = _check_dims(z, k)
    g = _finite_grad(p, z)
    h = k.step_size
    c = k.precond.matrix()
    mean = z - 0.5 * h ** 2 * ((g @ c) @ c.T)
    return gaussian_logpdf(z_new, mean, h * c)


def mala_entropy(k, dim):
    if dim != k.dim:
        raise DimensionMismatch("entropy of a %d-dim kernel at dim %d" % (k.dim, dim))
    return 0.5 * dim * (1.0 + LOG_2PI) + k.log_det_scale()


# HMC --------------------------------------------------------------------

def hmc_leapfrog(z, v, p, k):
    z = _check_dims(z, k)
    scale = k.scale_matrix()
    _finite_grad(p, z)
    traj = _integrate(z, np.asarray(v, dtype=np.float64), p, scale,
                      k.leapfrog_steps)
    if not np.all(_finite_rows(traj.u, *traj.grads)):
        raise DivergentTrajectory("leapfrog trajectory left the finite range")
    return LeapfrogResult(traj.positions,
                          _standard_momentum(scale, v),
                          _standard_momentum(scale, traj.u))


def hmc_energy_error(z, z_new, p0, p_end, p, k):
    scale = k.scale_matrix()
    kin0 = 0.5 * np.sum((np.asarray(p0) @ scale) ** 2, axis=-1)
    kin1 = 0.5 * np.sum((np.asarray(p_end) @ scale) ** 2, axis=-1)
    return p.value(z_new) - p.value(z) + kin1 - kin0


def leapfrog_polynomial(steps, truncated=False):
    """Scalar factor of the leapfrog Jacobian on a quadratic potential.

    For curvature ``λ`` of ``SᵀHS`` the position after ``steps`` moves
    responds to the initial whitened momentum by ``q(λ)``.

    >>> leapfrog_polynomial(2).coef.tolist()
    [2.0, -1.0]

    >>> leapfrog_polynomial(3, truncated=True).coef.tolist()
    [3.0, -4.0]
    """
    if truncated:
        return Polynomial([float(steps), -steps * (steps ** 2 - 1) / 6.0])
    lam = Polynomial([0.0, 1.0])
    q = Polynomial([0.0])
    u = Polynomial([1.0])
    for _ in range(steps):
        m = u - 0.5 * lam * q
        q = q + m
        u = m - 0.5 * lam * q
    return q


def _local_gaussian_terms(scale, hessian, steps, truncated=False):
    """log|det Q_L(SᵀHS)| and its gradient w.r.t. ``S`` for one Hessian."""
    poly = leapfrog_polynomial(steps, truncated)
    b = scale.T @ hessian @ scale
    lam, vecs = np.linalg.eigh(0.5 * (b + b.T))
    qv = poly(lam)
    if np.any(np.abs(qv) < SINGULAR_TOL * steps):
        raise SingularJacobian("leapfrog Jacobian is singular at curvature %s"
                               % lam[np.argmin(np.abs(qv))])
    kmat = (vecs * (poly.deriv()(lam) / qv)) @ vecs.T
    return float(np.sum(np.log(np.abs(qv)))), 2.0 * hessian @ scale @ kmat


def hmc_entropy_approx(k, q_mid, p, truncated=False):
    """Entropy of the HMC proposal under a frozen Hessian at ``q_mid``."""
    q_mid = _check_dims(q_mid, k)
    if q_mid.ndim != 1:
        raise DimensionMismatch("entropy is evaluated at a single point")
    hessian = p.hessian(q_mid)
    logdet_q, _ = _local_gaussian_terms(k.scale_matrix(), hessian,
                                        k.leapfrog_steps, truncated)
    return 0.5 * k.dim * (1.0 + LOG_2PI) + k.log_det_scale() + logdet_q


def _log_noise_density(v):
    v = np.asarray(v)
    return -0.5 * np.sum(v ** 2, axis=-1) - 0.5 * v.shape[-1] * LOG_2PI


def _hmc_log_r(traj, p, k, ok):
    """log|det Q_L| per chain; NaN where the chain diverged or is singular."""
    q_mid = traj.positions[k.leapfrog_steps // 2]
    scale = k.scale_matrix()
    rows = np.atleast_2d(q_mid)
    oks = np.atleast_1d(ok)
    out = np.full(rows.shape[0], np.nan)
    if q_mid.ndim == 2:
        hess = p.hessian(np.where(oks[:, None], rows, 0.0))
    else:
        hess = p.hessian(q_mid)[None] if oks[0] else np.zeros((1, k.dim, k.dim))
    for b in np.flatnonzero(oks):
        try:
            out[b], _ = _local_gaussian_terms(scale, hess[b], k.leapfrog_steps)
        except SingularJacobian:
            pass
    return out if q_mid.ndim == 2 else out[0]


# Metropolis-Hastings step -----------------------------------------------

def mh_step(z, p, k, rng):
    """One kernel move for a state or a stack of chains."""
    z = _check_dims(z, k)
    v = rng.normal(z.shape)
    scale = k.scale_matrix()
    traj = _integrate(z, v, p, scale, k.leapfrog_steps)
    z_new = traj.positions[-1]
    with np.errstate(invalid='ignore', over='ignore'):
        if k.kind == HMC:
            delta = hmc_energy_error(z, z_new, _standard_momentum(scale, v),
                                     _standard_momentum(scale, traj.u), p, k)
        else:
            delta = p.value(z_new) - p.value(z) \
                + 0.5 * np.sum(traj.u ** 2, axis=-1) - 0.5 * np.sum(v ** 2, axis=-1)
    ok = _finite_rows(z_new, traj.u, *traj.grads) & np.isfinite(delta)
    log_alpha = np.where(ok, np.minimum(0.0, -np.where(ok, delta, 0.0)), -np.inf)
    if z.ndim == 1:
        log_alpha = float(log_alpha)
        accepted = bool(np.log(rng.uniform()) < log_alpha)
        next_state = z_new if accepted else z
    else:
        accepted = np.log(rng.uniform(z.shape[0])) < log_alpha
        next_state = np.where(accepted[:, None], z_new, z)

    log_r = _log_noise_density(v) - k.log_det_scale()
    if k.kind == HMC and k.leapfrog_steps > 1:
        log_r = log_r - _hmc_log_r(traj, p, k, ok)
    if not np.all(ok):
        log.debug("%d divergent proposals rejected", int(np.sum(~ok)))
    return KernelOutput(next_state, z_new, accepted, log_alpha, log_r,
                        delta, v, ~ok)


# Speed-measure adaptation -----------------------------------------------

def _sanitize(traj, ok):
    keep = ok[:, None]
    traj.positions = [np.where(keep, a, 0.0) for a in traj.positions]
    traj.grads = [np.where(keep, a, 0.0) for a in traj.grads]
    traj.half_momenta = [np.where(keep, a, 0.0) for a in traj.half_momenta]
    traj.u = np.where(keep, traj.u, 0.0)
    return traj


def _energy_error_vjp(traj, p, scale, seed):
    """Σ_b seed_b ∂Δ_b/∂S by reverse accumulation through the leapfrog."""
    w = seed[:, None]
    qbar = w * traj.grads[-1]
    ubar = w * traj.u
    gbar_next = np.zeros_like(ubar)
    gs = np.zeros_like(scale)
    for l in reversed(range(len(traj.half_momenta))):
        gbar = gbar_next - 0.5 * ubar @ scale.T
        gs -= 0.5 * traj.grads[l + 1].T @ ubar
        qbar = qbar + p.hvp(traj.positions[l + 1], gbar)
        mbar = ubar + qbar @ scale
        gs += qbar.T @ traj.half_momenta[l]
        ubar = mbar
        gbar_next = -0.5 * mbar @ scale.T
        gs -= 0.5 * traj.grads[l].T @ mbar
    return gs


def speed_measure_grad_contrib(out, z_prev, p, k):
    """∇φ₁ of Σ_chains [log α(z, T(v)) - β log r(z, T(v))].

    The gradient is ordered as :meth:`KernelParams.params`. Rows whose
    proposal diverged contribute nothing. Under HMC the step size is not
    a free parameter and its entry is zero.
    """
    z_prev = np.atleast_2d(_check_dims(z_prev, k))
    noise = np.atleast_2d(out.noise)
    delta = np.atleast_1d(out.energy_error)
    scale = k.scale_matrix()
    h = k.step_size
    traj = _integrate(z_prev, noise, p, scale, k.leapfrog_steps)
    ok = _finite_rows(traj.u, *traj.positions, *traj.grads) & np.isfinite(delta)
    traj = _sanitize(traj, ok)

    # d/dΔ of min(0, -Δ)
    seed = np.where(ok & (delta > 0.0), -1.0, 0.0)
    gs = np.zeros_like(scale)
    if np.any(seed != 0.0):
        gs += _energy_error_vjp(traj, p, scale, seed)

    # -β log r = β (log|det S| + log|det Q_L|) + const
    n_ok = int(np.sum(ok))
    grad_log_h_entropy = k.beta * n_ok * k.dim
    gc_entropy = np.zeros_like(scale)
    if n_ok:
        gc_entropy += k.beta * n_ok * np.diag(1.0 / np.diag(scale)) * h
    if k.kind == HMC and k.leapfrog_steps > 1 and n_ok:
        q_mid = traj.positions[k.leapfrog_steps // 2]
        hess = p.hessian(q_mid)
        for b in np.flatnonzero(ok):
            _, g_b = _local_gaussian_terms(scale, hess[b], k.leapfrog_steps)
            gs += k.beta * g_b

    grad_log_h = float(np.sum(gs * scale)) + grad_log_h_entropy
    grad_c = h * gs + gc_entropy
    if k.kind == HMC:
        grad_log_h = 0.0
    return np.concatenate([[grad_log_h], k.precond.pullback(grad_c)])


# Controllers ------------------------------------------------------------

def beta_update(beta, accept_count, k, alpha_star, rho4):
    """Multiplicative entropy-weight controller.

    >>> round(beta_update(1.0, 1, 1, 0.5, 0.1), 12)
    1.05

    >>> round(beta_update(1.0, 0, 1, 0.5, 0.1), 12)
    0.95
    """
    if k < 1:
        return beta
    if not 0 <= accept_count <= k:
        raise ValueError("accept count %s outside [0, %d]" % (accept_count, k))
    return max(beta * (1.0 + rho4 * (accept_count / k - alpha_star)), BETA_FLOOR)


@dataclass
class DualAveragingState:
    log_h: float
    log_h_avg: float
    h_bar: float
    t: int
    mu: float
    gamma: float = 0.05
    t0: float = 10.0
    kappa: float = 0.75


def init_dual_averaging(log_h0, gamma=0.05, t0=10.0, kappa=0.75):
    return DualAveragingState(log_h=float(log_h0), log_h_avg=float(log_h0),
                              h_bar=0.0, t=0, mu=float(np.log(10.0) + log_h0),
                              gamma=gamma, t0=t0, kappa=kappa)


def dual_averaging_update(s, observed_accept, alpha_star):
    """Nesterov dual averaging of log h towards acceptance ``alpha_star``."""
    if not 0.0 <= observed_accept <= 1.0:
        raise ValueError("acceptance %s outside [0, 1]" % observed_accept)
    t = s.t + 1
    eta = 1.0 / (t + s.t0)
    h_bar = (1.0 - eta) * s.h_bar + eta * (alpha_star - observed_accept)
    log_h = s.mu - np.sqrt(t) / s.gamma * h_bar
    w = t ** -s.kappa
    log_h_avg = w * log_h + (1.0 - w) * s.log_h_avg
    return replace(s, log_h=float(log_h), log_h_avg=float(log_h_avg),
                   h_bar=float(h_bar), t=t)
