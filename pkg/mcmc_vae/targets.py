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
"""Potentials U(z) = -log p(x|z) - log p(z) consumed by the samplers.

A potential evaluates either a single state ``(d,)`` or a stack of
states ``(B, d)``. Potentials built from a batch of observations align
row ``b`` of the state with row ``b`` of the data.
"""

from abc import ABC, abstractmethod

import numpy as np

from .autodiff import Tape, hvp_finite_difference
from .errors import DimensionMismatch, UnsupportedLikelihood


class Potential(ABC):
    """Differentiable negative log density over ``dim`` latent coordinates."""

    dim = None

    @abstractmethod
    def value(self, z):
        pass

    @abstractmethod
    def grad(self, z):
        pass

    def hvp(self, z, v):
        return hvp_finite_difference(self.grad, z, v)

    def hessian(self, z):
        """Dense Hessian assembled from ``dim`` Hessian-vector products."""
        z = np.asarray(z, dtype=np.float64)
        eye = np.eye(self.dim)
        if z.ndim == 1:
            cols = [self.hvp(z, eye[i]) for i in range(self.dim)]
            return np.stack(cols, axis=-1)
        cols = [self.hvp(z, np.broadcast_to(eye[i], z.shape))
                for i in range(self.dim)]
        return np.stack(cols, axis=-1)

    def theta_grad(self, z):
        """Gradient of Σ_rows [log p(x|z) + log p(z)] w.r.t. θ at fixed z."""
        raise UnsupportedLikelihood(
            "%s has no generative parameters" % type(self).__name__)


class GaussianPotential(Potential):
    """U(z) = ½ (z - mean)ᵀ P (z - mean) for an SPD precision ``P``."""

    def __init__(self, mean, precision):
        self.mean = np.asarray(mean, dtype=np.float64)
        self.precision = np.asarray(precision, dtype=np.float64)
        self.dim = self.mean.shape[0]
        if self.precision.shape != (self.dim, self.dim):
            raise DimensionMismatch("precision does not match mean")

    def value(self, z):
        diff = np.asarray(z) - self.mean
        return 0.5 * np.sum(diff * (diff @ self.precision), axis=-1)

    def grad(self, z):
        return (np.asarray(z) - self.mean) @ self.precision

    def hvp(self, z, v):
        return np.asarray(v) @ self.precision

    def hessian(self, z):
        z = np.asarray(z)
        return np.broadcast_to(self.precision, z.shape[:-1] + self.precision.shape)


class FunctionPotential(Potential):
    """Potential from plain callables; HVPs fall back to finite differences."""

    def __init__(self, dim, value_fn, grad_fn, hvp_fn=None):
        self.dim = dim
        self._value = value_fn
        self._grad = grad_fn
        self._hvp = hvp_fn

    def value(self, z):
        return self._value(z)

    def grad(self, z):
        return self._grad(z)

    def hvp(self, z, v):
        if self._hvp is not None:
            return self._hvp(z, v)
        return super().hvp(z, v)


class ModelPotential(Potential):
    """Posterior potential of a latent variable model given data rows ``x``.

    Values and gradients run the model's taped log joint; the Hessian is
    probed by central differences of the taped gradient.
    """

    def __init__(self, model, x):
        self.model = model
        self.x = np.asarray(x, dtype=np.float64)
        self.dim = model.latent_dim

    def _check(self, z):
        z = np.asarray(z, dtype=np.float64)
        if z.shape[-1] != self.dim:
            raise DimensionMismatch("state has %d coordinates, expected %d"
                                    % (z.shape[-1], self.dim))
        return z

    def _log_joint(self, tape, theta, zn):
        shape = zn.value.shape
        x = self.x if len(shape) == self.x.ndim else np.broadcast_to(
            self.x, shape[:-1] + self.x.shape[-1:])
        return self.model.log_joint(tape, theta, x, zn)

    def value(self, z):
        z = self._check(z)
        tape = Tape()
        lj = self._log_joint(tape, self.model.const_theta(tape), tape.constant(z))
        return -lj.value

    def grad(self, z):
        z = self._check(z)
        tape = Tape()
        zn = tape.variable(z)
        lj = self._log_joint(tape, self.model.const_theta(tape), zn)
        tape.backward(tape.sum(lj))
        return -tape.grad(zn)

    def theta_grad(self, z):
        z = self._check(z)
        store = self.model.theta.copy()
        tape = Tape()
        lj = self._log_joint(tape, store.attach(tape), tape.constant(z))
        tape.backward(tape.sum(lj))
        return dict(store.grads)


def build_posterior_potential(model, x):
    """Potential of p(z | x) for ``model``; ``x`` may be a stack of rows."""
    if not hasattr(model, 'posterior_potential'):
        raise UnsupportedLikelihood(
            "%s exposes no likelihood gradient" % type(model).__name__)
    return model.posterior_potential(x)


def potential_hvp(p, z, v):
    z = np.asarray(z, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if z.shape != v.shape or z.shape[-1] != p.dim:
        raise DimensionMismatch("hvp: z %s, v %s, dim %d" % (z.shape, v.shape, p.dim))
    return p.hvp(z, v)
