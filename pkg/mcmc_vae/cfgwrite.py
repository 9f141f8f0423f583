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

import re

_BARE = re.compile(r'^[A-Za-z_./~][\w.\-/~:+]*$')


def gen_value(value):
    """Render one configuration value.

    >>> gen_value(True)
    'true'

    >>> gen_value(0.001)
    '0.001'

    >>> gen_value('lower-triangular')
    'lower-triangular'

    >>> gen_value('two words')
    '"two words"'

    >>> gen_value(['mala', 'hmc'])
    'mala, hmc'
    """
    if isinstance(value, (list, tuple)):
        return ', '.join(gen_value(v) for v in value)
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, int):
        return str(value)
    value = str(value)
    if _BARE.match(value) and value not in ('true', 'false'):
        return value
    return '"%s"' % value


def emit_config(sections):
    """Write ``{section: {key: value}}`` back as configuration text.

    Line numbers attached by the parser are dropped. Keys whose value
    is ``None`` are omitted.
    """
    out = ""
    for section in sections:
        if out:
            out += "\n"
        out += "[%s]\n" % section
        for key, value in sections[section].items():
            if isinstance(value, tuple) and len(value) == 2 \
                    and isinstance(value[1], int) and not isinstance(value[1], bool):
                value = value[0]
            if value is None:
                continue
            out += "%s = %s\n" % (key, gen_value(value))
    return out
