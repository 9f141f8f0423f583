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
"""Latent variable models: two-layer top-down hVAEs and a plain MLP VAE.

Every model keeps its generative parameters θ and its encoder parameters
φ₀ in two :class:`~mcmc_vae.autodiff.ParamStore` objects and writes its
densities as tape programs, so the same code yields values, pathwise
gradients and posterior potentials. Latent states are rows
``z = [z₁, z₂]``; data are rows ``x``.

In a two-layer stack the deterministic top-down features are ``d₁ = 0``
and ``d₂ = h(z₁)``, each holding ``[mean, log-variance]`` of its layer.
The encoder computes bottom-up features ``d'₂ = h'(x)``, ``d'₁ = h'(d'₂)``
and draws every layer in residual form::

    z_l = μ(d_l) + σ(d_l)·μ'(d_l, d'_l) + σ(d_l)·σ'_l·ε_l
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .autodiff import ParamStore, Tape
from .errors import DimensionMismatch, ShapeMismatch, UnsupportedLikelihood
from .numerics import LOG_2PI, cholesky, gaussian_logpdf
from .targets import ModelPotential

log = logging.getLogger(__name__)

GAUSSIAN = 'gaussian'
BERNOULLI = 'bernoulli'


def _dense(rng, rows, cols, scale=1.0):
    return rng.normal((rows, cols)) * scale / np.sqrt(cols)


def _rows(x):
    x = np.asarray(x, dtype=np.float64)
    return x, x.ndim == 1


# Tape building blocks ---------------------------------------------------

def gaussian_log_density(tape, x, mean, log_sigma):
    """Σ_i log N(x_i; mean_i, exp(log_sigma_i)²) per row."""
    white = tape.mul(tape.sub(x, mean), tape.exp(tape.scale_shift(log_sigma, -1.0)))
    n = mean.value.shape[-1]
    quad = tape.scale_shift(tape.sum(tape.square(white), axis=-1), -0.5,
                            -0.5 * n * LOG_2PI)
    return tape.sub(quad, tape.sum(log_sigma, axis=-1))


def bernoulli_log_density(tape, x, logits):
    """Σ_i [x_i·logit_i - softplus(logit_i)] per row."""
    return tape.sum(tape.sub(tape.mul(x, logits), tape.softplus(logits)), axis=-1)


def residual_kl(tape, mu_prime, log_sigma_prime):
    """½ Σ [σ'² + μ'² - 1 - 2 log σ'] per row."""
    two_ls = tape.scale_shift(log_sigma_prime, 2.0)
    t = tape.add(tape.exp(two_ls), tape.square(mu_prime))
    t = tape.sub(t, tape.scale_shift(two_ls, 1.0, 1.0))
    return tape.scale_shift(tape.sum(t, axis=-1), 0.5)


def _mlp(tape, params, prefix, x):
    h = tape.tanh(tape.affine(x, params[prefix + '_w1'], params[prefix + '_b1']))
    return tape.affine(h, params[prefix + '_w2'], params[prefix + '_b2'])


def _add_mlp(store, rng, prefix, n_in, n_hidden, n_out, scale=1.0):
    store.add(prefix + '_w1', _dense(rng, n_hidden, n_in, scale))
    store.add(prefix + '_b1', np.zeros(n_hidden))
    store.add(prefix + '_w2', _dense(rng, n_out, n_hidden, scale))
    store.add(prefix + '_b2', np.zeros(n_out))


# Encoders ---------------------------------------------------------------

class ResidualEncoder:
    """Bottom-up network and residual read-outs of a two-layer stack.

    Parameters (φ₀): bottom-up maps ``W'₂, b'₂`` (x → d'₂) and
    ``W'₁, b'₁`` (d'₂ → d'₁); read-outs ``B'_l, c'_l`` acting on
    ``[d_l, d'_l]``; per-layer log-scales ``b''_l``.
    """

    activation = None

    def __init__(self, n1, n2, dx, rng, scale=0.1):
        self.n1, self.n2, self.dx = n1, n2, dx
        m1, m2 = 2 * n1, 2 * n2
        self.phi0 = ParamStore()
        self.phi0.add('W2p', _dense(rng, m2, dx))
        self.phi0.add('b2p', np.zeros(m2))
        self.phi0.add('W1p', _dense(rng, m1, m2))
        self.phi0.add('b1p', np.zeros(m1))
        self.phi0.add('B1p', _dense(rng, n1, 2 * n1 + m1, scale))
        self.phi0.add('c1p', np.zeros(n1))
        self.phi0.add('B2p', _dense(rng, n2, 2 * n2 + m2, scale))
        self.phi0.add('c2p', np.zeros(n2))
        self.phi0.add('s1p', np.zeros(n1))
        self.phi0.add('s2p', np.zeros(n2))

    def _act(self, tape, x):
        return tape.tanh(x) if self.activation == 'tanh' else x

    def bottom_up(self, tape, ph, x):
        d2p = self._act(tape, tape.affine(x, ph['W2p'], ph['b2p']))
        d1p = self._act(tape, tape.affine(d2p, ph['W1p'], ph['b1p']))
        return d1p, d2p

    def readout(self, tape, ph, layer, d, dprime):
        """(μ'_l, log σ'_l) for layer 1 or 2."""
        mu = tape.affine(tape.concat([d, dprime]), ph['B%dp' % layer],
                         ph['c%dp' % layer])
        return mu, ph['s%dp' % layer]


class LinearEncoder(ResidualEncoder):
    pass


class TanhEncoder(ResidualEncoder):
    activation = 'tanh'


@dataclass
class PriorSample:
    z: np.ndarray
    d: list
    n1: int

    @property
    def z1(self):
        return self.z[..., :self.n1]

    @property
    def z2(self):
        return self.z[..., self.n1:]


@dataclass
class EncoderSample:
    z: object
    kl: object
    layers: list


# Two-layer stack --------------------------------------------------------

class HVAELayerStack:
    """Two-layer top-down hVAE; subclasses supply the dense maps."""

    kind = None
    likelihood = GAUSSIAN
    prior_names = ()

    def __init__(self, n1, n2, dx, theta, encoder=None, obs_log_sigma=None):
        self.n1, self.n2, self.dx = n1, n2, dx
        self.theta = theta
        self.encoder = encoder
        self._obs_log_sigma = obs_log_sigma

    @property
    def latent_dim(self):
        return self.n1 + self.n2

    @property
    def phi0(self):
        return self.encoder.phi0

    def const_theta(self, tape):
        return {name: tape.constant(v) for name, v in self.theta.values.items()}

    def const_phi0(self, tape):
        return {name: tape.constant(v) for name, v in self.phi0.values.items()}

    # maps supplied by subclasses

    def top_down(self, tape, th, z1):
        raise NotImplementedError

    def observation(self, tape, th, z2, d2):
        raise NotImplementedError

    def obs_log_sigma(self, tape, th):
        if 'obs_log_sigma' in th:
            return th['obs_log_sigma']
        return tape.constant(self._obs_log_sigma)

    # shared pieces

    def readout(self, tape, d, n):
        """Prior mean and log-scale of a layer from ``d = [mean, log var]``."""
        return tape.slice(d, 0, n), tape.scale_shift(tape.slice(d, n, 2 * n), 0.5)

    def _zero_d1(self, tape, like):
        shape = like.shape[:-1] + (2 * self.n1,)
        return tape.constant(np.zeros(shape))

    def log_prior(self, tape, th, z):
        z1 = tape.slice(z, 0, self.n1)
        z2 = tape.slice(z, self.n1, self.latent_dim)
        lp1 = tape.scale_shift(tape.sum(tape.square(z1), axis=-1), -0.5,
                               -0.5 * self.n1 * LOG_2PI)
        mu2, ls2 = self.readout(tape, self.top_down(tape, th, z1), self.n2)
        return tape.add(lp1, gaussian_log_density(tape, z2, mu2, ls2))

    def log_likelihood(self, tape, th, x, z):
        z1 = tape.slice(z, 0, self.n1)
        z2 = tape.slice(z, self.n1, self.latent_dim)
        d2 = self.top_down(tape, th, z1)
        out = self.observation(tape, th, z2, d2)
        x = tape._lift(x)
        if self.likelihood == BERNOULLI:
            return bernoulli_log_density(tape, x, out)
        if self.likelihood == GAUSSIAN:
            return gaussian_log_density(tape, x, out, self.obs_log_sigma(tape, th))
        raise UnsupportedLikelihood("unknown likelihood '%s'" % self.likelihood)

    def log_joint(self, tape, th, x, z):
        z = tape._lift(z)
        return tape.add(self.log_likelihood(tape, th, x, z),
                        self.log_prior(tape, th, z))

    def encoder_sample(self, tape, th, ph, x, eps):
        """Residual layer-wise draw of z given ``x`` and noise ``eps``."""
        if self.encoder is None:
            raise UnsupportedLikelihood("model has no encoder")
        x = tape._lift(x)
        eps = np.asarray(eps, dtype=np.float64)
        if eps.shape[-1] != self.latent_dim:
            raise ShapeMismatch("noise has %d coordinates, expected %d"
                                % (eps.shape[-1], self.latent_dim))
        d1p, d2p = self.encoder.bottom_up(tape, ph, x)
        d1 = self._zero_d1(tape, eps)
        z1, kl1 = self._draw(tape, ph, 1, d1, d1p, eps[..., :self.n1], self.n1)
        d2 = self.top_down(tape, th, z1)
        z2, kl2 = self._draw(tape, ph, 2, d2, d2p, eps[..., self.n1:], self.n2)
        layers = [(d1, d1p), (d2, d2p)]
        return EncoderSample(tape.concat([z1, z2]), tape.add(kl1, kl2), layers)

    def _draw(self, tape, ph, layer, d, dprime, eps, n):
        mu, ls = self.readout(tape, d, n)
        mup, lsp = self.encoder.readout(tape, ph, layer, d, dprime)
        sigma = tape.exp(ls)
        inner = tape.add(mup, tape.mul(tape.exp(lsp), eps))
        return tape.add(mu, tape.mul(sigma, inner)), residual_kl(tape, mup, lsp)

    def elbo(self, tape, th, ph, x, eps):
        """Single-sample ELBO per row and the sampled latent node."""
        sample = self.encoder_sample(tape, th, ph, x, eps)
        return tape.sub(self.log_likelihood(tape, th, x, sample.z), sample.kl), sample.z

    def layer_kl(self, layer, d, dprime):
        """KL of the residual encoder layer from its prior conditional."""
        tape = Tape()
        mup, lsp = self.encoder.readout(tape, self.const_phi0(tape), layer,
                                        tape.constant(d), tape.constant(dprime))
        return float(np.sum(residual_kl(tape, mup, lsp).value))

    def encoder_moments(self, x):
        """Mean of q⁰(z|x) at zero noise and the per-layer conditional scales."""
        x, single = _rows(x)
        xs = np.atleast_2d(x)
        tape = Tape()
        th, ph = self.const_theta(tape), self.const_phi0(tape)
        sample = self.encoder_sample(tape, th, ph, xs,
                                     np.zeros((xs.shape[0], self.latent_dim)))
        scales = []
        for layer, (d, dprime) in enumerate(sample.layers, 1):
            n = self.n1 if layer == 1 else self.n2
            _, ls = self.readout(tape, d, n)
            _, lsp = self.encoder.readout(tape, ph, layer, d, dprime)
            scales.append(np.exp(ls.value + lsp.value) * np.ones((xs.shape[0], n)))
        mean, scale = sample.z.value, np.concatenate(scales, axis=-1)
        return (mean[0], scale[0]) if single else (mean, scale)

    def log_joint_np(self, x, z):
        tape = Tape()
        return self.log_joint(tape, self.const_theta(tape), np.asarray(x),
                              tape.constant(z)).value

    def posterior_potential(self, x):
        return ModelPotential(self, x)

    def prior_sample(self, rng, n=None):
        rows = 1 if n is None else n
        tape = Tape()
        th = self.const_theta(tape)
        z1 = tape.constant(rng.normal((rows, self.n1)))
        d2 = self.top_down(tape, th, z1)
        mu2, ls2 = self.readout(tape, d2, self.n2)
        z2 = mu2.value + np.exp(ls2.value) * rng.normal((rows, self.n2))
        d1 = np.zeros((rows, 2 * self.n1))
        z = np.concatenate([z1.value, z2], axis=-1)
        if n is None:
            return PriorSample(z[0], [d1[0], d2.value[0]], self.n1)
        return PriorSample(z, [d1, d2.value], self.n1)

    def sample_data(self, rng, n):
        """Ancestral draws of ``n`` observations."""
        prior = self.prior_sample(rng, n)
        tape = Tape()
        th = self.const_theta(tape)
        d2 = tape.constant(prior.d[1])
        out = self.observation(tape, th, tape.constant(prior.z2), d2).value
        if self.likelihood == BERNOULLI:
            return (rng.uniform(out.shape) < 1.0 / (1.0 + np.exp(-out))).astype(float)
        sigma = np.exp(self.obs_log_sigma(tape, th).value)
        return out + sigma * rng.normal(out.shape)

    def state_tensors(self):
        tensors = {'theta/' + k: v for k, v in self.theta.values.items()}
        if self.encoder is not None:
            tensors.update({'phi0/' + k: v for k, v in self.phi0.values.items()})
        return tensors

    def load_tensors(self, tensors):
        for key, value in tensors.items():
            group, _, name = key.partition('/')
            if group == 'theta':
                self.theta[name] = value
            elif group == 'phi0' and self.encoder is not None:
                self.phi0[name] = value


class LinearHVAE(HVAELayerStack):
    """Linear-Gaussian two-layer hVAE with closed-form moments.

    θ holds ``A2`` (n2×n1), ``c2_mu``, ``c2_sigma`` (= 2 log σ of z₂|z₁),
    ``W2z`` and ``W2d`` (dx×n2), ``b`` and ``obs_log_sigma``.
    """

    kind = 'linear-hvae'
    prior_names = ('A2', 'c2_mu', 'c2_sigma')

    @classmethod
    def create(cls, n1, n2, dx, rng, obs_sigma=1.0, encoder=True, scale=1.0):
        theta = ParamStore()
        theta.add('A2', _dense(rng, n2, n1, scale))
        theta.add('c2_mu', np.zeros(n2))
        theta.add('c2_sigma', np.zeros(n2))
        theta.add('W2z', _dense(rng, dx, n2, scale))
        theta.add('W2d', _dense(rng, dx, n2, scale))
        theta.add('b', np.zeros(dx))
        theta.add('obs_log_sigma', np.full(dx, np.log(obs_sigma)))
        enc = LinearEncoder(n1, n2, dx, rng) if encoder else None
        return cls(n1, n2, dx, theta, enc)

    def top_down(self, tape, th, z1):
        mu = tape.affine(z1, th['A2'], th['c2_mu'])
        zeros = tape.constant(np.zeros(mu.shape))
        return tape.concat([mu, tape.add(zeros, th['c2_sigma'])])

    def observation(self, tape, th, z2, d2):
        return tape.add(tape.affine(z2, th['W2z'], th['b']),
                        tape.affine(tape.slice(d2, 0, self.n2), th['W2d']))

    # closed forms

    def decoder_matrix(self):
        """``W = [W2d A2, W2z]`` acting on ``z = [z1, z2]``."""
        t = self.theta
        return np.hstack([t['W2d'] @ t['A2'], t['W2z']])

    def decoder_offset(self):
        return self.theta['b'] + self.theta['W2d'] @ self.theta['c2_mu']

    def obs_variance(self):
        return np.exp(2.0 * self.theta['obs_log_sigma'])

    def prior_mean(self):
        return np.concatenate([np.zeros(self.n1), self.theta['c2_mu']])

    def prior_cov(self):
        a2 = self.theta['A2']
        lam = np.diag(np.exp(self.theta['c2_sigma']))
        return np.block([[np.eye(self.n1), a2.T], [a2, a2 @ a2.T + lam]])

    def prior_precision(self):
        return cho_solve(cho_factor(self.prior_cov(), lower=True),
                         np.eye(self.latent_dim))

    def marginal_moments(self):
        w = self.decoder_matrix()
        mean = w @ self.prior_mean() + self.decoder_offset()
        cov = w @ self.prior_cov() @ w.T + np.diag(self.obs_variance())
        return mean, 0.5 * (cov + cov.T)

    def posterior_precision(self):
        w = self.decoder_matrix()
        prec = w.T @ (w / self.obs_variance()[:, None]) + self.prior_precision()
        return 0.5 * (prec + prec.T)

    def posterior_moments(self, x):
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1] != self.dx:
            raise DimensionMismatch("x has %d entries, model %d" % (x.shape[-1], self.dx))
        w = self.decoder_matrix()
        sz = self.prior_cov()
        mu_x, sx = self.marginal_moments()
        wsz = w @ sz
        fac = cho_factor(sx, lower=True)
        cov = sz - wsz.T @ cho_solve(fac, wsz)
        mean = self.prior_mean() + cho_solve(fac, (x - mu_x).T).T @ wsz
        return mean, 0.5 * (cov + cov.T)

    def marginal_loglik(self, x):
        mu_x, sx = self.marginal_moments()
        return gaussian_logpdf(x, mu_x, cholesky(sx))

    def log_likelihood_np(self, x, z):
        mean = np.asarray(z) @ self.decoder_matrix().T + self.decoder_offset()
        var = self.obs_variance()
        r = np.asarray(x) - mean
        return -0.5 * np.sum(r ** 2 / var + np.log(var) + LOG_2PI, axis=-1)

    def log_prior_np(self, z):
        return gaussian_logpdf(z, self.prior_mean(), cholesky(self.prior_cov()))

    def log_joint_np(self, x, z):
        return self.log_likelihood_np(x, z) + self.log_prior_np(z)

    def posterior_potential(self, x):
        return LinearPosteriorPotential(self, x)


def linear_gaussian_elbo(model, x, mean, cov):
    """ELBO of a Gaussian q = N(mean, cov) under a linear hVAE.

    Equals ``model.marginal_loglik(x)`` when q is the exact posterior.
    """
    w = model.decoder_matrix()
    var = model.obs_variance()
    cov = np.asarray(cov, dtype=np.float64)
    d = model.latent_dim
    expected_lik = model.log_likelihood_np(x, mean) \
        - 0.5 * np.trace(w.T @ (w / var[:, None]) @ cov)
    expected_prior = model.log_prior_np(mean) \
        - 0.5 * np.trace(model.prior_precision() @ cov)
    entropy = 0.5 * d * (1.0 + LOG_2PI) + cholesky(cov).log_det()
    return float(expected_lik + expected_prior + entropy)


class LinearPosteriorPotential(ModelPotential):
    """Quadratic posterior potential of a linear hVAE in closed form."""

    def __init__(self, model, x):
        super().__init__(model, x)
        self._w = model.decoder_matrix()
        self._offset = model.decoder_offset()
        self._var = model.obs_variance()
        self._mu_z = model.prior_mean()
        self._prior_prec = model.prior_precision()
        self._prior_logdet = cholesky(model.prior_cov()).log_det()
        self.precision = model.posterior_precision()

    def value(self, z):
        z = self._check(z)
        r = self.x - z @ self._w.T - self._offset
        diff = z - self._mu_z
        lik = 0.5 * np.sum(r ** 2 / self._var + np.log(self._var) + LOG_2PI, axis=-1)
        prior = 0.5 * np.sum(diff * (diff @ self._prior_prec), axis=-1) \
            + self._prior_logdet + 0.5 * self.dim * LOG_2PI
        return lik + prior

    def grad(self, z):
        z = self._check(z)
        r = self.x - z @ self._w.T - self._offset
        return -(r / self._var) @ self._w + (z - self._mu_z) @ self._prior_prec

    def hvp(self, z, v):
        return np.asarray(v) @ self.precision

    def hessian(self, z):
        z = np.asarray(z)
        return np.broadcast_to(self.precision, z.shape[:-1] + self.precision.shape)


class MlpHVAE(HVAELayerStack):
    """Two-layer stack whose top-down map and decoder are tanh MLPs."""

    kind = 'mlp-hvae'
    prior_names = ('h2_w1', 'h2_b1', 'h2_w2', 'h2_b2')

    @classmethod
    def create(cls, n1, n2, dx, rng, hidden=32, likelihood=GAUSSIAN, obs_sigma=1.0):
        theta = ParamStore()
        _add_mlp(theta, rng, 'h2', n1, hidden, 2 * n2)
        _add_mlp(theta, rng, 'g', 2 * n2, hidden, dx)
        model = cls(n1, n2, dx, theta, TanhEncoder(n1, n2, dx, rng),
                    obs_log_sigma=np.full(dx, np.log(obs_sigma)))
        model.likelihood = likelihood
        return model

    def top_down(self, tape, th, z1):
        return _mlp(tape, th, 'h2', z1)

    def observation(self, tape, th, z2, d2):
        return _mlp(tape, th, 'g', tape.concat([z2, tape.slice(d2, 0, self.n2)]))


class MlpVAE:
    """Single-layer VAE with a standard normal prior and tanh MLPs."""

    kind = 'mlp-vae'
    prior_names = ()

    def __init__(self, latent_dim, dx, theta, phi0, likelihood=GAUSSIAN,
                 obs_log_sigma=None):
        self.latent_dim = latent_dim
        self.dx = dx
        self.theta = theta
        self.phi0 = phi0
        self.likelihood = likelihood
        self._obs_log_sigma = np.zeros(dx) if obs_log_sigma is None else obs_log_sigma

    @classmethod
    def create(cls, latent_dim, dx, rng, hidden=32, likelihood=GAUSSIAN, obs_sigma=1.0):
        theta, phi0 = ParamStore(), ParamStore()
        _add_mlp(theta, rng, 'dec', latent_dim, hidden, dx)
        _add_mlp(phi0, rng, 'enc', dx, hidden, 2 * latent_dim, scale=0.1)
        return cls(latent_dim, dx, theta, phi0, likelihood,
                   np.full(dx, np.log(obs_sigma)))

    def const_theta(self, tape):
        return {name: tape.constant(v) for name, v in self.theta.values.items()}

    def const_phi0(self, tape):
        return {name: tape.constant(v) for name, v in self.phi0.values.items()}

    def mlp_decode(self, tape, th, z):
        z = tape._lift(z)
        if z.value.shape[-1] != self.latent_dim:
            raise ShapeMismatch("decoder expects %d latents" % self.latent_dim)
        return _mlp(tape, th, 'dec', z)

    def mlp_encode(self, tape, ph, x):
        x = tape._lift(x)
        if x.value.shape[-1] != self.dx:
            raise ShapeMismatch("encoder expects %d inputs" % self.dx)
        out = _mlp(tape, ph, 'enc', x)
        return tape.slice(out, 0, self.latent_dim), \
            tape.slice(out, self.latent_dim, 2 * self.latent_dim)

    def log_prior(self, tape, th, z):
        return tape.scale_shift(tape.sum(tape.square(z), axis=-1), -0.5,
                                -0.5 * self.latent_dim * LOG_2PI)

    def log_likelihood(self, tape, th, x, z):
        out = self.mlp_decode(tape, th, z)
        x = tape._lift(x)
        if self.likelihood == BERNOULLI:
            return bernoulli_log_density(tape, x, out)
        if self.likelihood == GAUSSIAN:
            return gaussian_log_density(tape, x, out,
                                        tape.constant(self._obs_log_sigma))
        raise UnsupportedLikelihood("unknown likelihood '%s'" % self.likelihood)

    def log_joint(self, tape, th, x, z):
        z = tape._lift(z)
        return tape.add(self.log_likelihood(tape, th, x, z),
                        self.log_prior(tape, th, z))

    def encoder_sample(self, tape, th, ph, x, eps):
        mean, log_scale = self.mlp_encode(tape, ph, x)
        z = tape.add(mean, tape.mul(tape.exp(log_scale), np.asarray(eps)))
        return EncoderSample(z, residual_kl(tape, mean, log_scale), [])

    def elbo(self, tape, th, ph, x, eps):
        sample = self.encoder_sample(tape, th, ph, x, eps)
        return tape.sub(self.log_likelihood(tape, th, x, sample.z), sample.kl), sample.z

    def encoder_moments(self, x):
        tape = Tape()
        mean, log_scale = self.mlp_encode(tape, self.const_phi0(tape), np.asarray(x))
        return mean.value, np.exp(log_scale.value)

    def log_joint_np(self, x, z):
        tape = Tape()
        return self.log_joint(tape, self.const_theta(tape), np.asarray(x),
                              tape.constant(z)).value

    def posterior_potential(self, x):
        return ModelPotential(self, x)

    def prior_sample(self, rng, n=None):
        z = rng.normal(self.latent_dim if n is None else (n, self.latent_dim))
        return PriorSample(z, [], self.latent_dim)

    def sample_data(self, rng, n):
        z = self.prior_sample(rng, n).z
        tape = Tape()
        out = self.mlp_decode(tape, self.const_theta(tape), tape.constant(z)).value
        if self.likelihood == BERNOULLI:
            return (rng.uniform(out.shape) < 1.0 / (1.0 + np.exp(-out))).astype(float)
        return out + np.exp(self._obs_log_sigma) * rng.normal(out.shape)

    def state_tensors(self):
        tensors = {'theta/' + k: v for k, v in self.theta.values.items()}
        tensors.update({'phi0/' + k: v for k, v in self.phi0.values.items()})
        return tensors

    def load_tensors(self, tensors):
        for key, value in tensors.items():
            group, _, name = key.partition('/')
            if group == 'theta':
                self.theta[name] = value
            elif group == 'phi0':
                self.phi0[name] = value


MODEL_KINDS = ('linear-hvae', 'mlp-hvae', 'mlp-vae')


def build_model(kind, n1, n2, dx, rng, hidden=32, likelihood=GAUSSIAN, obs_sigma=1.0):
    if kind == 'linear-hvae':
        if likelihood != GAUSSIAN:
            raise UnsupportedLikelihood("linear hVAE is Gaussian only")
        return LinearHVAE.create(n1, n2, dx, rng, obs_sigma=obs_sigma, scale=0.5)
    if kind == 'mlp-hvae':
        return MlpHVAE.create(n1, n2, dx, rng, hidden, likelihood, obs_sigma)
    if kind == 'mlp-vae':
        return MlpVAE.create(n1 + n2, dx, rng, hidden, likelihood, obs_sigma)
    raise ValueError("unknown model kind '%s'" % kind)
