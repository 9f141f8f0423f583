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

import ply.yacc as yacc

from .cfglex import tokens
from .errors import ConfigError


def p_config(p):
    '''config : statements
              | empty'''
    sections = dict()
    current = None
    for entry in p[1] or []:
        if entry[0] == 'section':
            _, name, lineno = entry
            if name in sections:
                raise ConfigError("duplicate section [%s]" % name, lineno=lineno)
            sections[name] = dict()
            current = name
            continue
        _, key, value, lineno = entry
        if current is None:
            raise ConfigError("key '%s' outside of a section" % key,
                              lineno=lineno, key=key)
        if key in sections[current]:
            raise ConfigError("duplicate key '%s'" % key, lineno=lineno, key=key)
        sections[current][key] = (value, lineno)
    p[0] = sections


def p_statements(p):
    '''statements : statement
                  | statements statement'''
    if len(p) == 2:
        p[0] = [] if p[1] is None else [p[1]]
    else:
        p[0] = p[1] if p[2] is None else p[1] + [p[2]]


def p_statement(p):
    '''statement : section NEWLINE
                 | assignment NEWLINE
                 | NEWLINE'''
    p[0] = None if len(p) == 2 else p[1]


def p_section(p):
    '''section : LBRACKET WORD RBRACKET'''
    p[0] = ('section', p[2], p.lineno(2))


def p_assignment(p):
    '''assignment : WORD EQUALS value_list'''
    values = p[3]
    p[0] = ('key', p[1], values[0] if len(values) == 1 else values, p.lineno(1))


def p_value_list(p):
    '''value_list : value
                  | value_list COMMA value'''
    if len(p) == 2:
        p[0] = [p[1]]
    else:
        p[0] = p[1] + [p[3]]


def p_value(p):
    '''value : NUMBER
             | QSTRING
             | WORD'''
    p[0] = p[1]


def p_value_bool(p):
    '''value : TRUE
             | FALSE'''
    p[0] = p[1] == 'true'


def p_empty(p):
    '''empty :'''
    p[0] = None


def p_error(p):
    if p is None:
        raise ConfigError("unexpected end of input")
    value = 'end of line' if p.type == 'NEWLINE' else "'%s'" % (p.value,)
    raise ConfigError("syntax error at %s" % value, lineno=p.lineno)


parser = yacc.yacc(debug=False, write_tables=False, errorlog=yacc.NullLogger())
