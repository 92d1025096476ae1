"""Model specification and scaling-weight bookkeeping.

Physical scaling sends ``g -> λ^-2 g`` and each background ``t_j -> λ^{s_j} t_j``.
Under the coordinate dilation a derived curvature block with ``|A|``
derivatives carries weight ``2 + |A|`` and a derived background block
``s_j + l_j + |B|``. Counterterms for the Wick component ``Q`` are built from
monomials of total weight ``W = <Q, d_A + k>``.
"""

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from math import floor, lcm

from .tensor import MultiIndex, rational_power


class ScalingError(ValueError):
    pass


class Classification(enum.Enum):
    INADMISSIBLE = "inadmissible"
    ADMISSIBLE = "admissible"
    MARGINAL = "marginal"

    def __str__(self):
        return self.value


def as_fraction(x):
    """Exact rational from an int, Fraction or ``"p/q"`` string; floats are refused."""
    if isinstance(x, bool):
        raise ScalingError("expected a rational, got a boolean")
    if isinstance(x, float):
        raise ScalingError("refusing binary float %r; write it as a \"p/q\" string" % x)
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError):
            raise ScalingError("not a rational number: %r" % x) from None
    raise ScalingError("not a rational number: %r" % (x,))


@dataclass(frozen=True)
class Field:
    name: str
    rank: int
    degree: Fraction

    def __post_init__(self):
        if self.rank < 0:
            raise ScalingError("field %s: rank must be non-negative" % self.name)
        object.__setattr__(self, "degree", as_fraction(self.degree))


@dataclass(frozen=True)
class FieldMultiplet:
    entries: tuple

    def __post_init__(self):
        entries = tuple(self.entries)
        names = [f.name for f in entries]
        if len(set(names)) != len(names):
            raise ScalingError("duplicate field names in %s" % names)
        object.__setattr__(self, "entries", entries)

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    @property
    def ranks(self):
        return tuple(f.rank for f in self.entries)

    @property
    def degrees(self):
        return tuple(f.degree for f in self.entries)


@dataclass(frozen=True)
class BackgroundField:
    name: str
    rank: int
    degree: Fraction
    symmetry: str = "general"
    display: str = ""

    def __post_init__(self):
        if self.rank < 0:
            raise ScalingError("background %s: rank must be non-negative" % self.name)
        if self.symmetry not in ("general", "symmetric"):
            raise ScalingError("background %s: unknown symmetry %r" % (self.name, self.symmetry))
        object.__setattr__(self, "degree", as_fraction(self.degree))

    @property
    def label(self):
        return self.display or self.name

    @property
    def classification(self):
        return classify(self)

    @property
    def marginal(self):
        return self.classification is Classification.MARGINAL


@dataclass(frozen=True)
class ModelSpec:
    dim: int
    oriented: bool
    multiplet: FieldMultiplet
    backgrounds: tuple = ()
    max_weight: Fraction = None
    metadata: dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        if self.dim < 2:
            raise ScalingError("spacetime dimension must be at least 2")
        bgs = tuple(self.backgrounds)
        names = [f.name for f in self.multiplet] + [b.name for b in bgs]
        if len(set(names)) != len(names):
            raise ScalingError("duplicate names among fields and backgrounds: %s" % names)
        object.__setattr__(self, "backgrounds", bgs)
        if self.max_weight is not None:
            object.__setattr__(self, "max_weight", as_fraction(self.max_weight))

    def background(self, name):
        for b in self.backgrounds:
            if b.name == name:
                return b
        raise KeyError(name)

    @property
    def marginal_backgrounds(self):
        return tuple(b for b in self.backgrounds if b.marginal)

    def inadmissible(self):
        return [b for b in self.backgrounds if classify(b) is Classification.INADMISSIBLE]

    def require_admissible(self):
        bad = self.inadmissible()
        if bad and self.max_weight is None:
            raise ScalingError("inadmissible background(s) %s need an explicit weight cap"
                               % ", ".join(b.name for b in bad))


def classify(b):
    s = b.rank + as_fraction(b.degree)
    if s < 0:
        return Classification.INADMISSIBLE
    if s == 0:
        return Classification.MARGINAL
    return Classification.ADMISSIBLE


def _check_q(m, q):
    q = MultiIndex(q)
    if len(q) != len(m.multiplet):
        raise ScalingError("component %s has %d entries, multiplet has %d"
                           % (tuple(q), len(q), len(m.multiplet)))
    return q


def physical_degree(m, q):
    """``<Q, d_A>``: the physical scaling degree of the Wick component."""
    q = _check_q(m, q)
    return q.pair(m.multiplet.degrees)


def target_weight(m, q):
    """``W = <Q, d_A + k>``: total coordinate weight of admissible monomials."""
    q = _check_q(m, q)
    return q.pair([d + k for d, k in zip(m.multiplet.degrees, m.multiplet.ranks)])


def block_weight(kind, nderiv=0, background=None):
    """Coordinate weight of a derived curvature or derived background block.

    ``kind`` is ``"curvature"`` or ``"background"`` (the latter needs the
    :class:`BackgroundField`).
    """
    if nderiv < 0:
        raise ScalingError("negative derivative count")
    if kind == "curvature":
        return Fraction(2 + nderiv)
    if kind == "background":
        if background is None:
            raise ScalingError("background block needs its field")
        return background.degree + background.rank + nderiv
    raise ScalingError("unknown block kind %r" % (kind,))


def physical_weight(kind, background=None):
    """Exponent of λ picked up by the all-lower-index block value."""
    if kind == "curvature":
        return Fraction(-2)
    if kind == "background":
        return background.degree
    raise ScalingError("unknown block kind %r" % (kind,))


def max_derivative_order(m, w):
    """Largest derivative count any block of weight ``<= w`` can carry (-1 if w < 0)."""
    w = as_fraction(w)
    if m.inadmissible() and m.max_weight is None:
        raise ScalingError("derivative bound needs admissible backgrounds")
    if w < 0:
        return -1
    bounds = [w - 2]
    for b in m.backgrounds:
        bounds.append(w - (b.degree + b.rank))
    return max(0, floor(max(bounds)))


# ---------------------------------------------------------------------------
# homogeneity


def lambda_exponent(degrees):
    """``D`` with every ``D * degree`` integral (lcm of the denominators)."""
    d = 1
    for x in degrees:
        d = lcm(d, as_fraction(x).denominator)
    return d


def exact_lambdas(degrees, bases=(2, 3, 5)):
    """Scale factors ``μ^D`` for which every ``λ^degree`` is rational."""
    d = lambda_exponent(degrees)
    return [Fraction(b) ** d for b in bases]


def scale_factor(lam, degree):
    lam = as_fraction(lam)
    if lam <= 0:
        raise ScalingError("scale factors must be positive")
    f = rational_power(lam, as_fraction(degree))
    if f is None:
        raise ScalingError("λ=%s to the power %s is irrational" % (lam, degree))
    return f


def check_homogeneity(evaluator, expected_degree, lambdas, seeds=(0, 1, 2)):
    """True iff ``evaluator(λ, seed) == λ^degree * evaluator(1, seed)`` exactly.

    ``evaluator(lam, seed)`` must evaluate on the seeded inputs after scaling
    each of them by its own power of ``lam``.
    """
    for seed in seeds:
        base = evaluator(Fraction(1), seed)
        for lam in lambdas:
            f = scale_factor(lam, expected_degree)
            if evaluator(as_fraction(lam), seed) != base.scale(f):
                return False
    return True
