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

from . import cfglex
from . import cfgyacc
from . import cfgwrite


def init():
    cfglex.lexer.lineno = 1


def emit(sections):
    return cfgwrite.emit_config(sections)


def parse(input):
    """Parse configuration text into ``{section: {key: (value, line)}}``.

    >>> parse('[train]\\nK = 2\\n')
    {'train': {'K': (2, 2)}}

    >>> parse('[eval]\\nmodes = encoder-mean, chain-mean # both\\n')
    {'eval': {'modes': (['encoder-mean', 'chain-mean'], 2)}}
    """
    init()
    cfglex.input_data = input
    if not input.endswith('\n'):
        input = input + '\n'
    return cfgyacc.parser.parse(input, lexer=cfglex.lexer)


def values(parsed):
    """Drop line numbers from a parsed configuration.

    >>> values({'train': {'K': (2, 2)}})
    {'train': {'K': 2}}
    """
    return {section: {key: value for key, (value, _) in entries.items()}
            for section, entries in parsed.items()}
