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
"""Dense linear algebra, Gaussian densities and seedable random streams.

Matrices are plain 2-D ``numpy`` arrays of 64-bit floats. Anything that
takes a vector also accepts a stack of row vectors of shape ``(B, d)``
unless stated otherwise.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .errors import DimensionMismatch, NotPositiveDefinite
from . import utils

LOG_2PI = np.log(2.0 * np.pi)


def as_matrix(m):
    """Return ``m`` as a finite 2-D float64 array."""
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2:
        raise DimensionMismatch("expected a matrix, got shape %s" % (m.shape,))
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def symmetrize(m):
    return 0.5 * (m + m.T)


@dataclass
class LowerTriangularFactor:
    """Lower-triangular matrix with the diagonal stored as log-values.

    ``entries`` is a square array whose strictly lower part is used as is
    and whose diagonal holds ``log L_ii``. The realized diagonal is
    therefore strictly positive and the factor is always nonsingular.
    """

    entries: np.ndarray

    def __post_init__(self):
        self.entries = np.tril(np.asarray(self.entries, dtype=np.float64))
        if self.entries.ndim != 2 or \
                self.entries.shape[0] != self.entries.shape[1]:
            raise DimensionMismatch(
                "factor must be square, got %s" % (self.entries.shape,))

    @property
    def dim(self):
        return self.entries.shape[0]

    @classmethod
    def identity(cls, dim, scale=1.0):
        return cls(np.diag(np.full(dim, np.log(scale))))

    @classmethod
    def from_matrix(cls, lower):
        lower = np.tril(as_matrix(lower))
        diag = np.diag(lower)
        if np.any(diag <= 0.0):
            raise NotPositiveDefinite("factor diagonal must be positive")
        entries = np.tril(lower, -1) + np.diag(np.log(diag))
        return cls(entries)

    def diag(self):
        return np.exp(np.diag(self.entries))

    def matrix(self):
        return np.tril(self.entries, -1) + np.diag(self.diag())

    def log_det(self):
        return float(np.sum(np.diag(self.entries)))

    # unconstrained parameterization used by gradient-based adaptation

    def params(self):
        return self.entries[np.tril_indices(self.dim)].copy()

    def with_params(self, params):
        entries = np.zeros((self.dim, self.dim))
        entries[np.tril_indices(self.dim)] = params
        return LowerTriangularFactor(entries)

    def pullback(self, grad_matrix):
        """Map d/dC onto the unconstrained parameters."""
        g = np.tril(grad_matrix, -1) + np.diag(np.diag(grad_matrix) * self.diag())
        return g[np.tril_indices(self.dim)]


class RngStream:
    """Deterministic random stream identified by ``(seed, stream_id)``.

    Identical pairs reproduce identical draws; distinct stream ids are
    mixed through ``numpy.random.SeedSequence`` and behave independently.
    A stream is single-owner mutable state.
    """

    def __init__(self, seed, stream_id=0):
        self.seed = int(seed) & 0xFFFFFFFFFFFFFFFF
        self.stream_id = int(stream_id) & 0xFFFFFFFFFFFFFFFF
        seq = np.random.SeedSequence([self.seed, self.stream_id])
        self._gen = np.random.Generator(np.random.PCG64(seq))

    def __repr__(self):
        return "RngStream(seed=%d, stream_id=%d)" % (self.seed, self.stream_id)

    def spawn(self, *keys):
        """Child stream whose id is derived from this stream and ``keys``."""
        return RngStream(self.seed, utils.stream_id(self.stream_id, *keys))

    def normal(self, size=None):
        return self._gen.standard_normal(size)

    def uniform(self, size=None):
        return self._gen.random(size)

    def permutation(self, n):
        return self._gen.permutation(n)


def _lower(cov_factor):
    if isinstance(cov_factor, LowerTriangularFactor):
        return cov_factor.matrix()
    return np.tril(as_matrix(cov_factor))


def cholesky(m):
    """Cholesky factor of a symmetric positive definite matrix.

    >>> cholesky([[4.0, 2.0], [2.0, 3.0]]).matrix().round(6).tolist()
    [[2.0, 0.0], [1.0, 1.414214]]
    """
    m = as_matrix(m)
    n = m.shape[0]
    if m.shape != (n, n):
        raise DimensionMismatch("cholesky needs a square matrix")
    scale = max(float(np.max(np.abs(m))), np.finfo(float).tiny)
    if np.max(np.abs(m - m.T)) > 1e-10 * scale:
        raise NotPositiveDefinite("matrix is not symmetric")
    threshold = n * np.finfo(float).eps * float(np.max(np.diag(m)))
    try:
        lower = np.linalg.cholesky(m)
    except np.linalg.LinAlgError as e:
        raise NotPositiveDefinite(str(e))
    pivots = np.diag(lower) ** 2
    if not np.all(np.isfinite(pivots)) or np.any(pivots <= threshold):
        raise NotPositiveDefinite(
            "pivot %.3g below tolerance %.3g" % (np.min(pivots), threshold))
    return LowerTriangularFactor.from_matrix(lower)


def symmetric_eigenvalues(m):
    m = as_matrix(m)
    return np.linalg.eigvalsh(symmetrize(m))


def condition_number(m):
    """Ratio of the extreme eigenvalues of an SPD matrix.

    >>> condition_number(np.diag([1.0, 100.0]))
    100.0
    """
    lam = symmetric_eigenvalues(m)
    if lam[0] <= 0.0:
        raise NotPositiveDefinite("smallest eigenvalue %.3g" % lam[0])
    return float(lam[-1] / lam[0])


def gaussian_logpdf(x, mean, cov_factor):
    """log N(x; mean, L Lᵀ); rows of ``x`` are evaluated independently."""
    lower = _lower(cov_factor)
    x = np.asarray(x, dtype=np.float64)
    mean = np.asarray(mean, dtype=np.float64)
    d = lower.shape[0]
    if x.shape[-1] != d or mean.shape[-1] != d:
        raise DimensionMismatch(
            "dims differ: x %s, mean %s, factor %d" % (x.shape, mean.shape, d))
    diff = np.atleast_2d(x - mean)
    white = solve_triangular(lower, diff.T, lower=True)
    quad = np.sum(white ** 2, axis=0)
    logdet = np.sum(np.log(np.diag(lower)))
    out = -0.5 * quad - logdet - 0.5 * d * LOG_2PI
    if x.ndim == 1 and mean.ndim == 1:
        return float(out[0])
    return out


def kl_gaussians(mean1, cov1, mean2, cov2):
    """KL(N(mean1, cov1) || N(mean2, cov2))."""
    mean1 = np.asarray(mean1, dtype=np.float64)
    mean2 = np.asarray(mean2, dtype=np.float64)
    cov1 = as_matrix(cov1)
    cov2 = as_matrix(cov2)
    d = mean1.shape[0]
    if mean2.shape != (d,) or cov1.shape != (d, d) or cov2.shape != (d, d):
        raise DimensionMismatch("KL arguments disagree in dimension")
    l1 = cholesky(cov1)
    l2 = cholesky(cov2)
    m2 = l2.matrix()
    a = solve_triangular(m2, l1.matrix(), lower=True)
    b = solve_triangular(m2, mean2 - mean1, lower=True)
    kl = 0.5 * (np.sum(a ** 2) + np.sum(b ** 2) - d) \
        + l2.log_det() - l1.log_det()
    return max(float(kl), 0.0)


def sample_standard_normal(dim, rng, size=None):
    """``dim`` standard normal draws (or ``size`` rows of them)."""
    if dim < 1:
        raise DimensionMismatch("dim must be at least 1")
    if size is None:
        return rng.normal(dim)
    return rng.normal((size, dim))
