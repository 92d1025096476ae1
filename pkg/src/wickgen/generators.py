"""Generator blocks and weight-constrained monomials.

A block is one factor of a counterterm monomial: a symmetrized covariant
derivative of the curvature (in its S-tensor coordinates) or of a background
field. Undifferentiated marginal tensor backgrounds have weight zero and are
kept apart, since they may appear to any power.
"""

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .scaling import (
    Classification,
    ScalingError,
    block_weight,
    classify,
    physical_weight,
    target_weight,
)
from .tensor import CO, CONTRA, SymmetryType

CURVATURE = "curvature"
BACKGROUND = "background"
METRIC = "metric"
INVERSE_METRIC = "inverse_metric"
LEVI_CIVITA = "levi_civita"
KRONECKER = "kronecker"


@dataclass(frozen=True)
class Block:
    kind: str
    nderiv: int = 0
    background: object = None
    dim: int = 0

    def __post_init__(self):
        if self.kind == BACKGROUND and self.background is None:
            raise ScalingError("background block without a field")
        if self.kind == LEVI_CIVITA and self.dim < 1:
            raise ScalingError("Levi-Civita block needs the dimension")

    @property
    def field_rank(self):
        if self.kind == CURVATURE:
            return 4
        if self.kind == BACKGROUND:
            return self.background.rank
        if self.kind == LEVI_CIVITA:
            return self.dim
        return 2

    @property
    def rank(self):
        return self.field_rank + self.nderiv

    @property
    def variance(self):
        if self.kind == INVERSE_METRIC:
            return (CONTRA, CONTRA)
        if self.kind == KRONECKER:
            return (CONTRA, CO)
        return (CO,) * self.rank

    @property
    def symmetry(self):
        if self.kind == CURVATURE:
            return SymmetryType.curvature(self.nderiv)
        if self.kind == BACKGROUND:
            return SymmetryType.background(self.background.rank, self.nderiv, self.background.symmetry)
        if self.kind == LEVI_CIVITA:
            return SymmetryType.antisymmetric(self.dim)
        if self.kind in (METRIC, INVERSE_METRIC):
            return SymmetryType.symmetric(2)
        return SymmetryType.general(2)

    @property
    def coord_weight(self):
        if self.kind == CURVATURE:
            return block_weight("curvature", self.nderiv)
        if self.kind == BACKGROUND:
            return block_weight("background", self.nderiv, self.background)
        return Fraction(0)

    @property
    def phys_weight(self):
        """λ-exponent of the all-lower-index value under physical scaling."""
        if self.kind == CURVATURE:
            return physical_weight("curvature")
        if self.kind == BACKGROUND:
            return physical_weight("background", self.background)
        if self.kind == METRIC:
            return Fraction(-2)
        if self.kind == INVERSE_METRIC:
            return Fraction(2)
        if self.kind == LEVI_CIVITA:
            return Fraction(-self.dim)
        return Fraction(0)

    @property
    def marginal(self):
        return (self.kind == BACKGROUND and self.nderiv == 0
                and classify(self.background) is Classification.MARGINAL)

    @property
    def slot_groups(self):
        """Slot groups as ``(slots, mode)`` with mode ``sym`` or ``anti``.

        Slots inside a ``sym`` group are interchangeable; an ``anti`` group is
        totally antisymmetric. Single slots are ``sym`` groups of size one.
        """
        if self.kind == CURVATURE:
            return [((0, 1), "sym"), (tuple(range(2, self.rank)), "sym")]
        if self.kind == LEVI_CIVITA:
            return [(tuple(range(self.dim)), "anti")]
        if self.kind == BACKGROUND:
            out = []
            l = self.background.rank
            if self.background.symmetry == "symmetric" and l > 1:
                out.append((tuple(range(l)), "sym"))
            else:
                out.extend(((s,), "sym") for s in range(l))
            if self.nderiv:
                out.append((tuple(range(l, l + self.nderiv)), "sym"))
            return out
        return [((0,), "sym"), ((1,), "sym")]

    @property
    def group_swaps(self):
        """Extra permutations of ``slot_groups`` indices that fix the value."""
        if self.kind == CURVATURE and self.nderiv == 0:
            return [(1, 0)]
        return []

    @property
    def name(self):
        if self.kind == CURVATURE:
            return "S%d" % self.nderiv
        if self.kind == BACKGROUND:
            return "%s%s" % ("∇" * self.nderiv if self.nderiv < 4 else "∇^%d" % self.nderiv, self.background.label)
        return {METRIC: "g", INVERSE_METRIC: "g^-1", LEVI_CIVITA: "ε", KRONECKER: "δ"}[self.kind]

    def sort_key(self):
        if self.kind == CURVATURE:
            return (0, "", self.nderiv)
        if self.kind == BACKGROUND:
            return (1, self.background.name, self.nderiv)
        return (2, self.kind, self.nderiv)

    def describe(self):
        d = {"kind": self.kind, "nderiv": self.nderiv}
        if self.background is not None:
            d["field"] = self.background.name
        return d

    def __repr__(self):
        return "Block(%s)" % self.name


def levi_civita_block(dim):
    return Block(LEVI_CIVITA, dim=dim)


@dataclass(frozen=True)
class Monomial:
    blocks: tuple = ()
    marginal_blocks: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(sorted(self.blocks, key=Block.sort_key)))
        object.__setattr__(self, "marginal_blocks", tuple(sorted(self.marginal_blocks, key=Block.sort_key)))

    @property
    def total_weight(self):
        return sum((b.coord_weight for b in self.blocks), Fraction(0))

    @property
    def all_blocks(self):
        return self.blocks + self.marginal_blocks

    @property
    def slot_count(self):
        return sum(b.rank for b in self.all_blocks)

    def sort_key(self):
        return (len(self.marginal_blocks), [b.sort_key() for b in self.blocks],
                [b.sort_key() for b in self.marginal_blocks])

    def label(self):
        names = [b.name for b in self.all_blocks]
        return "{" + ", ".join(names) + "}"

    def __repr__(self):
        return "Monomial%s" % self.label()


def catalog_blocks(m, w):
    """Blocks with ``0 < weight <= w``, then the marginal tensor blocks (weight 0).

    Scalar marginal backgrounds are left out: undifferentiated they are
    invariants themselves and belong to the coefficient functions.
    """
    w = Fraction(w)
    m.require_admissible()
    cap = m.max_weight
    top = w if cap is None else max(w, cap)
    pos, marg = [], []
    nd = 0
    while 2 + nd <= top:
        pos.append(Block(CURVATURE, nd))
        nd += 1
    for b in m.backgrounds:
        cls = classify(b)
        if cls is Classification.INADMISSIBLE:
            # weight-capped mode: every derivative order with nonzero weight up to the cap
            nd = 0
            while block_weight("background", nd, b) <= top:
                if block_weight("background", nd, b) != 0:
                    pos.append(Block(BACKGROUND, nd, b))
                nd += 1
            continue
        nd = 0
        while block_weight("background", nd, b) <= top:
            blk = Block(BACKGROUND, nd, b)
            if blk.coord_weight > 0:
                pos.append(blk)
            elif b.rank > 0:
                marg.append(blk)
            nd += 1
    pos.sort(key=Block.sort_key)
    marg.sort(key=Block.sort_key)
    return pos + marg


def _multisets(blocks, w, start=0):
    # all non-decreasing index sequences over blocks whose weights sum to w
    if w == 0:
        yield ()
    for i in range(start, len(blocks)):
        bw = blocks[i].coord_weight
        if bw <= w:
            for rest in _multisets(blocks, w - bw, i):
                yield (blocks[i],) + rest


def _capped_multisets(blocks, w, cap):
    # weight-capped mode: signed weights, bounded total absolute weight
    out = []

    def rec(i, acc, remaining, chosen):
        if i == len(blocks):
            if acc == w:
                out.append(tuple(chosen))
            return
        b = blocks[i]
        a = abs(b.coord_weight)
        c = 0
        while c * a <= remaining:
            rec(i + 1, acc + c * b.coord_weight, remaining - c * a, chosen + [b] * c)
            c += 1

    rec(0, Fraction(0), Fraction(cap), [])
    return out


def enumerate_monomials(m, q, marginal_cap=0):
    """All monomials of total weight ``target_weight(m, q)``.

    Each positive-weight multiset is repeated with 0..``marginal_cap``
    marginal tensor blocks. Ordered by marginal count, then block content,
    so raising the cap only appends.
    """
    if marginal_cap < 0:
        raise ValueError("marginal_cap must be non-negative")
    w = target_weight(m, q)
    cat = catalog_blocks(m, w)
    pos = [b for b in cat if not b.marginal]
    marg = [b for b in cat if b.marginal]
    if m.inadmissible():
        bases = _capped_multisets(pos, w, m.max_weight)
    else:
        if w < 0:
            return []
        bases = list(_multisets(pos, w))
    out = []
    for c in range(marginal_cap + 1):
        for extra in itertools.combinations_with_replacement(marg, c):
            for base in bases:
                out.append(Monomial(base, extra))
    uniq = {mono: None for mono in out}
    return sorted(uniq, key=Monomial.sort_key)
