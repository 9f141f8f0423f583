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


class McmcVaeError(Exception):
    """Base class of every error raised by the package."""


class NotPositiveDefinite(McmcVaeError):
    pass


class DimensionMismatch(McmcVaeError):
    pass


class ShapeMismatch(McmcVaeError):
    pass


class NonScalarOutput(McmcVaeError):
    pass


class NonFiniteGradient(McmcVaeError):
    pass


class DivergentTrajectory(McmcVaeError):
    pass


class SingularJacobian(McmcVaeError):
    pass


class UnsupportedLikelihood(McmcVaeError):
    pass


class NonFiniteLoss(McmcVaeError):
    pass


class DegenerateProposal(McmcVaeError):
    pass


class IoError(McmcVaeError):
    pass


class ConfigError(McmcVaeError):
    """Invalid configuration; ``lineno`` and ``key`` point at the culprit."""

    def __init__(self, message, lineno=None, key=None):
        self.lineno = lineno
        self.key = key
        if lineno is not None:
            message = "line %d: %s" % (lineno, message)
        super().__init__(message)
