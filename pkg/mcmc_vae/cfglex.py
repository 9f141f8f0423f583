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
"""Tokens of the experiment configuration format.

::

    # comment
    [train]
    kernel = hmc
    lr_theta = 1e-3
    values = mala, hmc
"""

import ply.lex as lex

from .errors import ConfigError

input_data = ""

reserved = {
    'true': 'TRUE',
    'false': 'FALSE',
}

tokens = (
    'LBRACKET',
    'RBRACKET',
    'EQUALS',
    'COMMA',
    'NUMBER',
    'QSTRING',
    'WORD',
    'NEWLINE',
) + tuple(reserved.values())

t_LBRACKET = r'\['
t_RBRACKET = r'\]'
t_EQUALS = r'='
t_COMMA = r','

t_ignore = ' \t\r'


def t_COMMENT(t):
    r'\#[^\n]*'
    pass


def t_QSTRING(t):
    r'"[^"\n]*"'
    t.value = t.value[1:-1]
    return t


# define NUMBER as function so it takes precedence over WORD
def t_NUMBER(t):
    r'[-+]?(?:\d+\.\d*|\.\d+|\d+)(?:[eE][-+]?\d+)?(?![\w.\-/])'
    text = t.value
    if any(c in text for c in '.eE'):
        t.value = float(text)
    else:
        t.value = int(text)
    return t


def t_WORD(t):
    r'[A-Za-z0-9_./~][\w.\-/~:+]*'
    t.type = reserved.get(t.value, 'WORD')
    return t


def t_NEWLINE(t):
    r'\n+'
    t.lexer.lineno += len(t.value)
    return t


def t_error(t):
    raise ConfigError("illegal character '%s' at column %d"
                      % (t.value[0], find_column(input_data, t)),
                      lineno=t.lineno)

# Compute column.
# input is the input text string
# token is a token instance


def find_column(input, token):
    line_start = input.rfind('\n', 0, token.lexpos) + 1
    return (token.lexpos - line_start) + 1


lexer = lex.lex()
