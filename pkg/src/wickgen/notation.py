"""A small index notation for writing counterterm expressions by hand.

An expression is a sum of products of factors with optional rational
coefficients::

    g[ab] m2[]  -  1/2 S[ccab]  +  xi[cd;ab] xi[cd]

Factors are ``g[ab]`` (the metric), ``S[abcd;ef]`` (a curvature coordinate
block with derivative slots after the semicolon) and ``name[field;deriv]``
for a background of the model. A letter used twice is contracted with the
inverse metric; letters used once are the output slots, listed explicitly
by the caller. Nested derivatives are read as the symmetrized jet
coordinate of the same order.

:class:`Expression` offers the same ``monomial``/``output``/``dim`` and
``evaluate_batch`` surface as a contraction term, so it can be tested for
span membership against an enumerated basis.
"""

import re
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from math import gcd

import numpy as np

from .contraction import OutputSignature, _maxabs, _minkowski_signs, _symmetrize_sum
from .generators import BACKGROUND, CURVATURE, Block, Monomial

_BATCH = "Z"
_TOKEN = re.compile(r"\s*(?:(?P<op>[+-])|(?P<num>\d+(?:/\d+)?)\s*\*?|(?P<name>[A-Za-z][A-Za-z0-9_]*)\[(?P<idx>[^\]]*)\])")


class NotationError(ValueError):
    pass


@dataclass(frozen=True)
class _Factor:
    kind: str  # "g" or "block"
    block: Block
    letters: str


@dataclass(frozen=True)
class _Product:
    coeff: Fraction
    factors: tuple

    def blocks(self):
        return [f.block for f in self.factors if f.kind == "block"]


def _parse_factor(name, idx, model):
    field, _, deriv = idx.partition(";")
    field, deriv = field.strip(), deriv.strip()
    if not all(ch.isalpha() for ch in field + deriv):
        raise NotationError("indices must be single letters: %s[%s]" % (name, idx))
    if _BATCH in field + deriv:
        raise NotationError("index letter %s is reserved" % _BATCH)
    if name == "g":
        if deriv or len(field) != 2:
            raise NotationError("metric takes two indices and no derivatives: g[%s]" % idx)
        return _Factor("g", None, field)
    if name == "S":
        if len(field) != 4:
            raise NotationError("curvature coordinate needs four indices before ';': S[%s]" % idx)
        return _Factor("block", Block(CURVATURE, len(deriv)), field + deriv)
    try:
        bg = model.background(name)
    except KeyError:
        raise NotationError("unknown factor %r" % name) from None
    if len(field) != bg.rank:
        raise NotationError("%s has rank %d, got indices %r" % (name, bg.rank, field))
    return _Factor("block", Block(BACKGROUND, len(deriv), bg), field + deriv)


def parse_expression(text, model):
    """Parse into a list of products ``(coefficient, factors)``."""
    pos = 0
    products = []
    sign, coeff, factors = 1, None, []
    expect_term = True

    def flush():
        if not factors:
            raise NotationError("empty product in %r" % text)
        products.append(_Product(sign * (coeff if coeff is not None else Fraction(1)), tuple(factors)))

    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise NotationError("cannot parse %r at column %d" % (text, pos + 1))
        pos = m.end()
        if m.group("op"):
            if not expect_term:
                flush()
                sign, coeff, factors = 1, None, []
            if m.group("op") == "-":
                sign = -sign
            expect_term = True
        elif m.group("num"):
            if factors or coeff is not None:
                raise NotationError("coefficient must lead its product in %r" % text)
            coeff = Fraction(m.group("num"))
        else:
            factors.append(_parse_factor(m.group("name"), m.group("idx"), model))
            expect_term = False
    flush()
    return products


class Expression:
    """A parsed expression with a fixed ordered list of output letters."""

    def __init__(self, text, model, output_letters, signature=None, label=""):
        self.text = text
        self.label = label
        self.dim = model.dim
        self.output_letters = output_letters
        self.products = parse_expression(text, model)
        sig = signature if signature is not None else OutputSignature.tensor(len(output_letters))
        if sig.rank != len(output_letters):
            raise NotationError("output signature has rank %d but %d output letters were given"
                                % (sig.rank, len(output_letters)))
        self._output = sig
        keys = {self._block_key(p) for p in self.products}
        if len(keys) != 1:
            raise NotationError("summands of %r have different block content" % text)
        blocks = self.products[0].blocks()
        self.monomial = Monomial(tuple(b for b in blocks if not b.marginal),
                                 tuple(b for b in blocks if b.marginal))
        for p in self.products:
            self._check_letters(p)
        den = 1
        for p in self.products:
            den = den * p.coeff.denominator // gcd(den, p.coeff.denominator)
        self._ints = [int(p.coeff * den) for p in self.products]

    @staticmethod
    def _block_key(p):
        return tuple(sorted((b.sort_key() for b in p.blocks())))

    def _check_letters(self, p):
        counts = Counter("".join(f.letters for f in p.factors))
        free = sorted(c for c, k in counts.items() if k == 1)
        over = [c for c, k in counts.items() if k > 2]
        if over:
            raise NotationError("index %s appears more than twice in %r" % (over[0], self.text))
        if free != sorted(self.output_letters):
            raise NotationError("free indices %s of %r do not match the output %r"
                                % ("".join(free), self.text, self.output_letters))

    @property
    def output(self):
        return self._output

    def __repr__(self):
        return "Expression(%s)" % self.text

    @property
    def display(self):
        return self.text

    def _product_batch(self, p, fetch, count):
        counts = Counter("".join(f.letters for f in p.factors))
        arrays, specs = [], []
        for f in p.factors:
            if f.kind == "g":
                arrays.append(np.diag(_minkowski_signs(self.dim)))
                specs.append(f.letters)
                continue
            arr, batched = fetch(f.block)
            arrays.append(arr)
            specs.append((_BATCH if batched else "") + f.letters)
        for c, k in counts.items():
            if k == 2:
                arrays.append(_minkowski_signs(self.dim))
                specs.append(c)
        arrays.append(np.ones(count, dtype=np.int64))
        specs.append(_BATCH)
        summed = sum(1 for k in counts.values() if k == 2)
        bound = self.dim ** summed
        for a in arrays:
            bound *= max(_maxabs(np.asarray(a)), 1)
        spec = ",".join(specs) + "->" + _BATCH + self.output_letters
        if bound >= 2**62:
            return np.einsum(spec, *[np.asarray(a).astype(object) for a in arrays],
                             optimize="greedy" if len(arrays) > 2 else False)
        return np.einsum(spec, *[np.asarray(a, dtype=np.int64) for a in arrays],
                         optimize="greedy" if len(arrays) > 2 else False)

    def evaluate_batch(self, fetch, count):
        total = None
        for c, p in zip(self._ints, self.products):
            arr = self._product_batch(p, fetch, count)
            if c != 1:
                arr = arr.astype(object) * c if _maxabs(arr) * abs(c) >= 2**62 else arr * c
            total = arr if total is None else _add(total, arr)
        return _symmetrize_sum(total, self._output, 1)


def _add(a, b):
    if a.dtype == object or b.dtype == object or _maxabs(a) + _maxabs(b) >= 2**62:
        return a.astype(object) + b.astype(object)
    return a + b
