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
import os
import sys

import numpy as np

# add `mcmc_vae` source tree into PYTHONPATH
sys.path.append(os.path.join(os.path.dirname(__file__), '..', '..'))

from mcmc_vae.autodiff import Tape
from mcmc_vae.errors import ShapeMismatch, UnsupportedLikelihood
from mcmc_vae.models import (HVAELayerStack, LinearHVAE, MlpHVAE, MlpVAE,
                             build_model, linear_gaussian_elbo)
from mcmc_vae.numerics import RngStream, cholesky, gaussian_logpdf, kl_gaussians
from mcmc_vae.targets import ModelPotential


def random_linear(rng, n1=2, n2=3, dx=5):
    model = LinearHVAE.create(n1, n2, dx, rng, obs_sigma=0.5 + rng.uniform())
    model.theta['c2_mu'] = rng.normal(n2)
    model.theta['c2_sigma'] = 0.5 * rng.normal(n2)
    model.theta['b'] = rng.normal(dx)
    return model


class TestLinearOracles(unittest.TestCase):

    def test_posterior_matches_joint_conditioning(self):
        rng = RngStream(11)
        for _ in range(100):
            model = random_linear(rng)
            w = model.decoder_matrix()
            sz = model.prior_cov()
            sx = w @ sz @ w.T + np.diag(model.obs_variance())
            x = rng.normal(model.dx)
            cov_zx = sz @ w.T
            mu_x = w @ model.prior_mean() + model.decoder_offset()
            cov = sz - cov_zx @ np.linalg.solve(sx, cov_zx.T)
            mean = model.prior_mean() + cov_zx @ np.linalg.solve(sx, x - mu_x)
            post_mean, post_cov = model.posterior_moments(x)
            np.testing.assert_allclose(post_cov, cov, rtol=1e-8, atol=1e-10)
            np.testing.assert_allclose(post_mean, mean, rtol=1e-8, atol=1e-10)
            np.testing.assert_allclose(np.linalg.inv(model.posterior_precision()),
                                       cov, rtol=1e-8, atol=1e-10)

    def test_bayes_identity(self):
        rng = RngStream(12)
        model = random_linear(rng)
        x = model.sample_data(rng, 3)
        mean, cov = model.posterior_moments(x)
        for i in range(3):
            z = rng.normal(model.latent_dim)
            log_post = gaussian_logpdf(z, mean[i], cholesky(cov))
            expected = model.log_joint_np(x[i], z) - log_post
            self.assertAlmostEqual(float(model.marginal_loglik(x[i])), expected, places=8)

    def test_taped_joint_matches_closed_form(self):
        rng = RngStream(13)
        model = random_linear(rng)
        x = model.sample_data(rng, 4)
        z = rng.normal((4, model.latent_dim))
        taped = HVAELayerStack.log_joint_np(model, x, z)
        np.testing.assert_allclose(taped, model.log_joint_np(x, z), rtol=1e-10)

    def test_elbo_is_tight_at_the_posterior(self):
        rng = RngStream(14)
        model = random_linear(rng)
        x = model.sample_data(rng, 1)[0]
        mean, cov = model.posterior_moments(x)
        self.assertAlmostEqual(linear_gaussian_elbo(model, x, mean, cov),
                               float(model.marginal_loglik(x)), places=8)
        self.assertLess(linear_gaussian_elbo(model, x, mean, 0.5 * cov),
                        float(model.marginal_loglik(x)))

    def test_layer_kl_matches_gaussian_kl(self):
        rng = RngStream(15)
        model = random_linear(rng)
        n2 = model.n2
        model.phi0['B2p'] = rng.normal(model.phi0['B2p'].shape)
        model.phi0['s2p'] = 0.3 * rng.normal(n2)
        for _ in range(10):
            d = rng.normal(2 * n2)
            dprime = rng.normal(2 * n2)
            tape = Tape()
            mu, ls = model.readout(tape, tape.constant(d), n2)
            mup, lsp = model.encoder.readout(tape, model.const_phi0(tape), 2,
                                             tape.constant(d), tape.constant(dprime))
            sigma, sigmap = np.exp(ls.value), np.exp(lsp.value)
            expected = kl_gaussians(mu.value + sigma * mup.value,
                                    np.diag((sigma * sigmap) ** 2),
                                    mu.value, np.diag(sigma ** 2))
            self.assertAlmostEqual(model.layer_kl(2, d, dprime), expected, places=10)


class TestPotentials(unittest.TestCase):

    def test_linear_potential_matches_taped_potential(self):
        rng = RngStream(21)
        model = random_linear(rng)
        x = model.sample_data(rng, 3)
        z = rng.normal((3, model.latent_dim))
        closed = model.posterior_potential(x)
        taped = ModelPotential(model, x)
        np.testing.assert_allclose(closed.value(z), taped.value(z), rtol=1e-10)
        np.testing.assert_allclose(closed.grad(z), taped.grad(z), rtol=1e-8, atol=1e-10)
        np.testing.assert_allclose(closed.hessian(z[0]),
                                   np.linalg.inv(model.posterior_moments(x[0])[1]),
                                   rtol=1e-8, atol=1e-8)

    def test_theta_gradient_of_mlp_model(self):
        rng = RngStream(22)
        model = MlpHVAE.create(2, 3, 4, rng, hidden=5)
        x = model.sample_data(rng, 2)
        z = rng.normal((2, model.latent_dim))
        grads = ModelPotential(model, x).theta_grad(z)
        name = 'g_b2'
        eps = 1e-6
        base = model.theta[name].copy()
        fd = np.zeros_like(base)
        for i in range(base.shape[0]):
            e = np.zeros_like(base)
            e[i] = eps
            model.theta[name] = base + e
            up = np.sum(model.log_joint_np(x, z))
            model.theta[name] = base - e
            down = np.sum(model.log_joint_np(x, z))
            fd[i] = (up - down) / (2 * eps)
        model.theta[name] = base
        np.testing.assert_allclose(grads[name], fd, rtol=1e-5, atol=1e-7)

    def test_mlp_potential_gradient(self):
        rng = RngStream(23)
        model = MlpVAE.create(3, 4, rng, hidden=6)
        x = model.sample_data(rng, 1)[0]
        p = model.posterior_potential(x)
        z = rng.normal(3)
        eps = 1e-6
        fd = np.array([(p.value(z + eps * e) - p.value(z - eps * e)) / (2 * eps)
                       for e in np.eye(3)])
        np.testing.assert_allclose(p.grad(z), fd, rtol=1e-5, atol=1e-7)


class TestModels(unittest.TestCase):

    def check_model(self, model, rng):
        x = model.sample_data(rng, 6)
        self.assertEqual(x.shape, (6, model.dx))
        tape = Tape()
        rows, z = model.elbo(tape, model.const_theta(tape), model.const_phi0(tape), x,
                             rng.normal((6, model.latent_dim)))
        self.assertEqual(rows.value.shape, (6,))
        self.assertEqual(z.value.shape, (6, model.latent_dim))
        self.assertTrue(np.all(np.isfinite(rows.value)))
        mean, scale = model.encoder_moments(x)
        self.assertEqual(mean.shape, (6, model.latent_dim))
        self.assertTrue(np.all(scale > 0.0))

    def test_build_all_kinds(self):
        rng = RngStream(31)
        for kind in ('linear-hvae', 'mlp-hvae', 'mlp-vae'):
            with self.subTest(kind):
                self.check_model(build_model(kind, 2, 3, 4, rng, hidden=5), rng)

    def test_bernoulli_likelihood(self):
        rng = RngStream(32)
        model = build_model('mlp-vae', 2, 2, 5, rng, hidden=4, likelihood='bernoulli')
        x = model.sample_data(rng, 10)
        self.assertTrue(set(np.unique(x)).issubset({0.0, 1.0}))
        self.check_model(model, rng)

    def test_linear_model_is_gaussian_only(self):
        with self.assertRaises(UnsupportedLikelihood):
            build_model('linear-hvae', 2, 3, 4, RngStream(0), likelihood='bernoulli')

    def test_tensor_round_trip(self):
        rng = RngStream(33)
        a = build_model('mlp-hvae', 2, 3, 4, rng, hidden=5)
        b = build_model('mlp-hvae', 2, 3, 4, rng, hidden=5)
        b.load_tensors(a.state_tensors())
        x = a.sample_data(rng, 3)
        z = rng.normal((3, a.latent_dim))
        np.testing.assert_array_equal(a.log_joint_np(x, z), b.log_joint_np(x, z))

    def test_noise_shape_is_checked(self):
        rng = RngStream(34)
        model = build_model('linear-hvae', 2, 3, 4, rng)
        tape = Tape()
        with self.assertRaises(ShapeMismatch):
            model.encoder_sample(tape, model.const_theta(tape), model.const_phi0(tape),
                                 np.zeros((1, 4)), np.zeros((1, 4)))


def test_prior_covariance_matches_samples():
    rng = RngStream(41)
    model = random_linear(rng, n1=1, n2=2, dx=3)
    z = model.prior_sample(rng, 200000).z
    assert np.allclose(np.cov(z.T), model.prior_cov(), atol=0.15)
    assert np.allclose(z.mean(axis=0), model.prior_mean(), atol=0.05)
