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

# add `mcmc_vae` source tree into PYTHONPATH
sys.path.append(os.path.join(os.path.dirname(__file__), '..', '..'))
sys.path.append(os.path.dirname(__file__))

from mcmc_vae import cfgparse, cfgwrite
from test_config_syntax import NullLogger, reconfigure


# Defines a data set to be tested. The structure is a list of records,
# where each record is a 3-element list such that 1st element is a description,
# 2nd element is the input config and 3rd element is the expected config
# text after parsing and writing out.
# Leading whitespace, trailing whitespace and empty lines are trimmed from
# the expected data before comparison with actuals.
testdata = [
['minimal',
'''[train]
K=2''',
'''\
[train]
K = 2
'''
],
['comments and blank lines',
'''\
# desk-scale run

[train]   # section comment
kernel = hmc
''','''\
[train]
kernel = hmc
'''
],
['numbers',
'''\
[train]
lr_theta = 1e-3
tau = 1.5
init_log_h = -2
''','''\
[train]
lr_theta = 0.001
tau = 1.5
init_log_h = -2
'''
],
['strings and booleans',
'''\
[output]
dir = "runs/a"
name = "two words"
flag = true
quoted = "false"
''','''\
[output]
dir = runs/a
name = "two words"
flag = true
quoted = "false"
'''
],
['lists and sections',
'''\
[data]
kind = synthetic-linear
[sweep]
values = gradmala-lt,gradhmc-lt ,  hvae
seeds = 1, 2
''','''\
[data]
kind = synthetic-linear

[sweep]
values = gradmala-lt, gradhmc-lt, hvae
seeds = 1, 2
'''
],
]


# Removes empty lines and trims leading and trailing whitespace from
# a (generally multi-line) string.
def trim_whitespace(string):
    return "\n".join([l.strip() for l in string.splitlines() if l.strip()])


# Performs full config syntax tests by parsing an input, writing it
# back out and comparing with the expected output.
class TestParseAndWrite(unittest.TestCase):

    def setUp(self):
        reconfigure(errorlog=NullLogger)
        self.maxDiff = None

    def test_testdata(self):
        for data in testdata:
            with self.subTest(data[0], data=data):
                exp = trim_whitespace(data[2])
                act = trim_whitespace(cfgparse.emit(cfgparse.parse(data[1])))
                self.assertEqual(act, exp)

    def test_output_stability(self):
        for data in testdata:
            with self.subTest(data[0], data=data):
                once = cfgparse.emit(cfgparse.parse(data[1]))
                twice = cfgparse.emit(cfgparse.parse(once))
                self.assertEqual(once, twice)

    def test_values_survive(self):
        for data in testdata:
            with self.subTest(data[0], data=data):
                parsed = cfgparse.values(cfgparse.parse(data[1]))
                again = cfgparse.values(cfgparse.parse(cfgparse.emit(parsed)))
                self.assertEqual(parsed, again)


def test_none_values_are_skipped():
    text = cfgwrite.emit_config({'train': {'alpha_star': None, 'K': 2}})
    assert text == "[train]\nK = 2\n"
