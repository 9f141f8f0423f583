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

import hashlib
import math
import struct


def stream_id(*keys):
    """Derive a 64-bit stream id from integer or string keys.

    The mapping is stable across runs and platforms.

    >>> stream_id(1, 2) == stream_id(1, 2)
    True

    >>> stream_id(1, 2) == stream_id(2, 1)
    False

    >>> 0 <= stream_id('sweep', 3) < 2 ** 64
    True
    """
    h = hashlib.blake2b(digest_size=8)
    for k in keys:
        if isinstance(k, str):
            h.update(b's' + k.encode('utf-8'))
        else:
            h.update(b'i' + struct.pack('<Q', int(k) & 0xFFFFFFFFFFFFFFFF))
    return struct.unpack('<Q', h.digest())[0]


def mean_std(values):
    """Mean and sample standard deviation (``n - 1`` denominator).

    >>> mean_std([1.0, 2.0, 3.0])
    (2.0, 1.0)

    >>> mean_std([5.0])
    (5.0, 0.0)

    >>> mean_std([])
    (nan, nan)
    """
    n = len(values)
    if n == 0:
        return float('nan'), float('nan')
    mean = sum(values) / n
    if n == 1:
        return mean, 0.0
    var = sum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, math.sqrt(var)


def format_metric(value):
    """Render a metric for CSV output; missing values become empty cells.

    >>> format_metric(None)
    ''

    >>> format_metric(0.1)
    '0.1'

    >>> format_metric(float('nan'))
    ''
    """
    if value is None:
        return ''
    if isinstance(value, float):
        if math.isnan(value):
            return ''
        return repr(value)
    return str(value)
