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
"""Reverse-mode differentiation over dense numpy tensors.

Values are computed eagerly when an op is recorded. Every node keeps a
vector-Jacobian closure; :meth:`Tape.backward` walks the node list once in
reverse and pushes adjoints into named parameter slots of a
:class:`ParamStore` and into plain variable leaves.

Tensors are vectors or stacks of row vectors ``(B, n)``; elementwise
binary ops broadcast along rows.
"""

from collections import OrderedDict

import numpy as np
from scipy.special import expit

from .errors import NonScalarOutput, ShapeMismatch


class Node:
    __slots__ = ('id', 'op', 'inputs', 'value', 'vjp', 'slot')

    def __init__(self, id, op, inputs, value, vjp=None, slot=None):
        self.id = id
        self.op = op
        self.inputs = inputs
        self.value = value
        self.vjp = vjp
        self.slot = slot

    @property
    def shape(self):
        return self.value.shape

    def __repr__(self):
        return "Node(%d, %s, shape=%s)" % (self.id, self.op, self.shape)


class ParamStore:
    """Named parameter tensors with gradient accumulators."""

    def __init__(self, params=None):
        self.values = OrderedDict()
        self.grads = OrderedDict()
        for name, value in (params or {}).items():
            self.add(name, value)

    def add(self, name, value):
        value = np.array(value, dtype=np.float64)
        self.values[name] = value
        self.grads[name] = np.zeros_like(value)

    def __getitem__(self, name):
        return self.values[name]

    def __setitem__(self, name, value):
        value = np.asarray(value, dtype=np.float64)
        if value.shape != self.values[name].shape:
            raise ShapeMismatch("parameter %s has shape %s, got %s" % (
                name, self.values[name].shape, value.shape))
        self.values[name] = value

    def __contains__(self, name):
        return name in self.values

    def __iter__(self):
        return iter(self.values)

    def names(self):
        return list(self.values)

    def zero_grad(self):
        for name in self.grads:
            self.grads[name] = np.zeros_like(self.values[name])

    def accumulate(self, name, grad):
        if grad.shape != self.grads[name].shape:
            raise ShapeMismatch("gradient for %s has shape %s, expected %s" % (
                name, grad.shape, self.grads[name].shape))
        self.grads[name] = self.grads[name] + grad

    def attach(self, tape, names=None):
        """Record every parameter (or ``names``) as a leaf of ``tape``."""
        return {name: tape.param(self, name) for name in (names or self.values)}

    def copy(self):
        return ParamStore({k: v.copy() for k, v in self.values.items()})


def _unbroadcast(grad, shape):
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


class Tape:
    """Append-only record of nodes; node ids are topologically ordered."""

    def __init__(self):
        self.nodes = []
        self._leaf_grads = {}

    def record(self, op, inputs, value, vjp=None, slot=None):
        node = Node(len(self.nodes), op, inputs,
                    np.asarray(value, dtype=np.float64), vjp, slot)
        self.nodes.append(node)
        return node

    def _lift(self, x):
        if isinstance(x, Node):
            return x
        return self.constant(x)

    # leaves

    def constant(self, value):
        return self.record('const', (), value)

    def variable(self, value):
        return self.record('leaf', (), value)

    def param(self, store, name):
        return self.record('leaf', (), store[name], slot=(store, name))

    # ops

    def affine(self, x, w, b=None):
        """``W x + b`` for a vector or each row of ``x``."""
        x, w = self._lift(x), self._lift(w)
        if w.value.ndim != 2 or x.value.shape[-1] != w.value.shape[1]:
            raise ShapeMismatch("affine: x %s, W %s" % (x.shape, w.shape))
        out = x.value @ w.value.T
        inputs = (x, w)
        if b is not None:
            b = self._lift(b)
            if b.value.shape != (w.value.shape[0],):
                raise ShapeMismatch("affine: bias %s" % (b.shape,))
            out = out + b.value
            inputs = (x, w, b)
        xv, wv = x.value, w.value

        def vjp(g):
            gx = g @ wv
            gw = np.outer(g, xv) if xv.ndim == 1 else g.T @ xv
            grads = [gx, gw]
            if len(inputs) == 3:
                grads.append(g if g.ndim == 1 else g.sum(axis=0))
            return grads
        return self.record('affine', inputs, out, vjp)

    def matmul(self, a, b):
        a, b = self._lift(a), self._lift(b)
        av, bv = a.value, b.value
        if av.ndim not in (1, 2) or bv.ndim not in (1, 2) \
                or av.shape[-1] != bv.shape[0]:
            raise ShapeMismatch("matmul: %s @ %s" % (av.shape, bv.shape))

        def vjp(g):
            if av.ndim == 2 and bv.ndim == 2:
                return g @ bv.T, av.T @ g
            if av.ndim == 2:
                return np.outer(g, bv), av.T @ g
            if bv.ndim == 2:
                return bv @ g, np.outer(av, g)
            return g * bv, g * av
        return self.record('matmul', (a, b), av @ bv, vjp)

    def _binary(self, op, a, b, fn, da, db):
        a, b = self._lift(a), self._lift(b)
        try:
            out = fn(a.value, b.value)
        except ValueError:
            raise ShapeMismatch("%s: %s vs %s" % (op, a.shape, b.shape))
        av, bv = a.value, b.value

        def vjp(g):
            return (_unbroadcast(da(g, av, bv), av.shape),
                    _unbroadcast(db(g, av, bv), bv.shape))
        return self.record(op, (a, b), out, vjp)

    def add(self, a, b):
        return self._binary('add', a, b, np.add,
                            lambda g, a, b: g, lambda g, a, b: g)

    def sub(self, a, b):
        return self._binary('sub', a, b, np.subtract,
                            lambda g, a, b: g, lambda g, a, b: -g)

    def mul(self, a, b):
        return self._binary('mul', a, b, np.multiply,
                            lambda g, a, b: g * b, lambda g, a, b: g * a)

    def _unary(self, op, x, fn, dfn):
        x = self._lift(x)
        xv = x.value
        out = fn(xv)
        return self.record(op, (x,), out, lambda g: (g * dfn(xv, out),))

    def exp(self, x):
        return self._unary('exp', x, np.exp, lambda x, y: y)

    def tanh(self, x):
        return self._unary('tanh', x, np.tanh, lambda x, y: 1.0 - y ** 2)

    def softplus(self, x):
        return self._unary('softplus', x, lambda x: np.logaddexp(0.0, x),
                           lambda x, y: expit(x))

    def log(self, x):
        return self._unary('log', x, np.log, lambda x, y: 1.0 / x)

    def square(self, x):
        return self._unary('square', x, np.square, lambda x, y: 2.0 * x)

    def scale_shift(self, x, scale=1.0, shift=0.0):
        """``scale * x + shift`` with constant ``scale`` and ``shift``."""
        x = self._lift(x)
        out = x.value * scale + shift
        shape = x.value.shape
        return self.record('scale_shift', (x,), out,
                           lambda g: (_unbroadcast(g * scale, shape),))

    def sum(self, x, axis=None):
        """Sum of all entries, or along ``axis`` (``-1`` sums each row)."""
        x = self._lift(x)
        shape = x.value.shape
        out = x.value.sum(axis=axis)

        def vjp(g):
            if axis is not None:
                g = np.expand_dims(g, axis)
            return (np.broadcast_to(g, shape).copy(),)
        return self.record('sum', (x,), out, vjp)

    def concat(self, xs, axis=-1):
        xs = [self._lift(x) for x in xs]
        try:
            out = np.concatenate([x.value for x in xs], axis=axis)
        except ValueError:
            raise ShapeMismatch(
                "concat: %s" % ([x.shape for x in xs],))
        bounds = np.cumsum([x.value.shape[axis] for x in xs])[:-1]

        def vjp(g):
            return np.split(g, bounds, axis=axis)
        return self.record('concat', tuple(xs), out, vjp)

    def slice(self, x, start, stop):
        """Entries ``start:stop`` along the last axis."""
        x = self._lift(x)
        n = x.value.shape[-1]
        if not 0 <= start < stop <= n:
            raise ShapeMismatch("slice %d:%d of length %d" % (start, stop, n))
        shape = x.value.shape

        def vjp(g):
            full = np.zeros(shape)
            full[..., start:stop] = g
            return (full,)
        return self.record('slice', (x,), x.value[..., start:stop], vjp)

    def logdet_lower(self, m):
        """log |det M| of a lower-triangular matrix."""
        m = self._lift(m)
        mv = m.value
        if mv.ndim != 2 or mv.shape[0] != mv.shape[1]:
            raise ShapeMismatch("logdet_lower needs a square matrix")
        diag = np.diag(mv)
        return self.record('logdet_lower', (m,),
                           np.sum(np.log(np.abs(diag))),
                           lambda g: (np.diag(g / diag),))

    def quadratic_form(self, x, a):
        """``xᵀ A x``, per row when ``x`` is a stack of rows."""
        x, a = self._lift(x), self._lift(a)
        xv, av = x.value, a.value
        if av.ndim != 2 or xv.shape[-1] != av.shape[0] \
                or av.shape[0] != av.shape[1]:
            raise ShapeMismatch("quadratic_form: x %s, A %s" % (xv.shape, av.shape))
        ax = xv @ av.T
        out = np.sum(xv * ax, axis=-1)

        def vjp(g):
            gx = np.expand_dims(g, -1) * (xv @ (av + av.T).T)
            if xv.ndim == 1:
                ga = g * np.outer(xv, xv)
            else:
                ga = (xv * g[:, None]).T @ xv
            return gx, ga
        return self.record('quadratic_form', (x, a), out, vjp)

    # reverse pass

    def backward(self, output):
        """Accumulate d(output)/d(leaf) into parameter slots and leaves."""
        if output.value.size != 1:
            raise NonScalarOutput("backward needs a scalar, got shape %s"
                                  % (output.shape,))
        adjoints = {output.id: np.ones_like(output.value)}
        for node in reversed(self.nodes[:output.id + 1]):
            g = adjoints.pop(node.id, None)
            if g is None:
                continue
            if node.op == 'leaf':
                if node.slot is not None:
                    store, name = node.slot
                    store.accumulate(name, g)
                else:
                    prev = self._leaf_grads.get(node.id)
                    self._leaf_grads[node.id] = g if prev is None else prev + g
                continue
            if node.vjp is None:
                continue
            for inp, gi in zip(node.inputs, node.vjp(g)):
                if inp.op == 'const':
                    continue
                prev = adjoints.get(inp.id)
                adjoints[inp.id] = gi if prev is None else prev + gi

    def grad(self, node):
        """Gradient accumulated into a variable leaf by :meth:`backward`."""
        g = self._leaf_grads.get(node.id)
        return np.zeros_like(node.value) if g is None else g


def default_hvp_eps(z):
    """Step per state; a stack of states gets one step per row."""
    z = np.asarray(z, dtype=np.float64)
    if z.ndim < 2:
        return 1e-5 * (1.0 + float(np.max(np.abs(z), initial=0.0)))
    return 1e-5 * (1.0 + np.max(np.abs(z), axis=-1, keepdims=True))


def hvp_finite_difference(grad_fn, z, v, eps=None):
    """Central-difference Hessian-vector product of ``grad_fn`` at ``z``."""
    z = np.asarray(z, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if eps is None:
        eps = default_hvp_eps(z)
    return (grad_fn(z + eps * v) - grad_fn(z - eps * v)) / (2.0 * eps)
