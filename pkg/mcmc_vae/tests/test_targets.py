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

from mcmc_vae.errors import DimensionMismatch, UnsupportedLikelihood
from mcmc_vae.numerics import RngStream
from mcmc_vae.targets import (FunctionPotential, GaussianPotential,
                              build_posterior_potential, potential_hvp)


def make_gaussian(seed, d):
    rng = RngStream(seed)
    a = rng.normal((d, d))
    return GaussianPotential(rng.normal(d), a @ a.T + np.eye(d))


class TestGaussianPotential(unittest.TestCase):

    def setUp(self):
        self.p = make_gaussian(1, 3)

    def test_zero_at_mean(self):
        self.assertEqual(float(self.p.value(self.p.mean)), 0.0)
        np.testing.assert_allclose(self.p.grad(self.p.mean), np.zeros(3))

    def test_batched_values(self):
        z = RngStream(2).normal((5, 3))
        values = self.p.value(z)
        self.assertEqual(values.shape, (5,))
        self.assertAlmostEqual(values[2], float(self.p.value(z[2])))

    def test_hessian_batches(self):
        z = np.zeros((4, 3))
        self.assertEqual(self.p.hessian(z).shape, (4, 3, 3))

    def test_precision_shape(self):
        with self.assertRaises(DimensionMismatch):
            GaussianPotential(np.zeros(2), np.eye(3))


class TestFunctionPotential(unittest.TestCase):

    def test_finite_difference_hessian(self):
        g = make_gaussian(4, 3)
        p = FunctionPotential(3, g.value, g.grad)
        z = RngStream(5).normal(3)
        np.testing.assert_allclose(p.hessian(z), g.precision, rtol=1e-6, atol=1e-6)

    def test_batched_hessian(self):
        g = make_gaussian(6, 2)
        p = FunctionPotential(2, g.value, g.grad)
        z = RngStream(7).normal((3, 2))
        h = p.hessian(z)
        self.assertEqual(h.shape, (3, 2, 2))
        np.testing.assert_allclose(h[1], g.precision, rtol=1e-6, atol=1e-6)

    def test_no_theta_gradient(self):
        g = make_gaussian(8, 2)
        with self.assertRaises(UnsupportedLikelihood):
            g.theta_grad(np.zeros(2))


def test_potential_hvp_checks_shapes():
    p = make_gaussian(9, 3)
    try:
        potential_hvp(p, np.zeros(3), np.zeros(2))
    except DimensionMismatch:
        return
    assert False, "expected DimensionMismatch"


def test_build_posterior_potential_needs_a_model():
    try:
        build_posterior_potential(object(), np.zeros(2))
    except UnsupportedLikelihood:
        return
    assert False, "expected UnsupportedLikelihood"
