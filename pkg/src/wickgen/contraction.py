"""Contraction schemes, exact evaluation and basis reduction.

A scheme is a complete pairing of the index slots of a monomial's blocks,
the output slots and (in oriented mode) one Levi-Civita symbol. Pairings
are enumerated as multigraphs on slot groups (interchangeable slots of a
symmetric block are one node), up to the automorphisms of identical
blocks, the curvature pair exchange and the output symmetry.

Terms are evaluated exactly at the Minkowski metric on seeded random block
values; linear (or module) independence is then decided by exact ranks.
"""

import itertools
import zlib
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np

from .generators import BACKGROUND, CURVATURE, LEVI_CIVITA, Block, Monomial, levi_civita_block
from .kernels import enumerate_multigraphs
from .linalg import certified_pivots, modular_pivots
from .tensor import CO, DenseTensor, SymmetryType, _perm_sign, random_in_symmetry, transform

_INT64_SAFE = 2**62
_LETTERS = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXY"
_BATCH = "Z"


# ---------------------------------------------------------------------------
# output signatures


@dataclass(frozen=True)
class OutputSignature:
    """The tensor type ⊗_i S^{q_i}(T*^{⊗k_i}) of a Wick component coefficient.

    ``copies`` holds the ``(q_i, k_i)`` pairs with ``q_i, k_i > 0``.
    """

    copies: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "copies", tuple((int(q), int(k)) for q, k in self.copies if q > 0 and k > 0))

    @classmethod
    def for_component(cls, m, q):
        return cls(tuple(zip(q, m.multiplet.ranks)))

    @classmethod
    def tensor(cls, rank):
        """Plain rank-``rank`` covariant tensors, no symmetry."""
        return cls(((1, rank),)) if rank else cls()

    @classmethod
    def symmetric(cls, rank):
        return cls(((rank, 1),)) if rank else cls()

    @property
    def rank(self):
        return sum(q * k for q, k in self.copies)

    @property
    def symmetry(self):
        return SymmetryType.block_copies(self.copies)

    def nodes(self):
        """Slot groups of the output as ``(slots, mode)``."""
        out, pos = [], 0
        for q, k in self.copies:
            if k == 1:
                out.append((tuple(range(pos, pos + q)), "sym"))
            else:
                out.extend(((s,), "sym") for s in range(pos, pos + q * k))
            pos += q * k
        return out

    def node_generators(self):
        """Copy exchanges as permutations of the indices of :meth:`nodes`."""
        gens, idx = [], 0
        nn = len(self.nodes())
        for q, k in self.copies:
            if k == 1:
                idx += 1
                continue
            for c in range(q - 1):
                p = list(range(nn))
                a, b = idx + c * k, idx + (c + 1) * k
                for s in range(k):
                    p[a + s], p[b + s] = b + s, a + s
                gens.append(tuple(p))
            idx += q * k
        return gens

    def slot_factors(self):
        """Per-factor lists of slot permutations; the output group is their product."""
        factors, pos = [], 0
        r = self.rank
        for q, k in self.copies:
            perms = []
            if k == 1 and q > 1:
                for p in itertools.permutations(range(pos, pos + q)):
                    full = list(range(r))
                    for s, t in zip(range(pos, pos + q), p):
                        full[s] = t
                    perms.append(tuple(full))
            elif k > 1 and q > 1:
                for p in itertools.permutations(range(q)):
                    full = list(range(r))
                    for c, d in enumerate(p):
                        for s in range(k):
                            full[pos + c * k + s] = pos + d * k + s
                    perms.append(tuple(full))
            if perms:
                factors.append(perms)
            pos += q * k
        return factors

    def group_order(self):
        o = 1
        for f in self.slot_factors():
            o *= len(f)
        return o

    def representatives(self, dim):
        """Flat indices of one component per orbit of the output symmetry."""
        r = self.rank
        if r == 0:
            return np.array([0])
        factors = self.slot_factors()
        reps = []
        for idx in itertools.product(range(dim), repeat=r):
            orbit = {idx}
            for fac in factors:
                orbit = {tuple(c[p[i]] for i in range(r)) for c in orbit for p in fac}
            if idx == min(orbit):
                reps.append(np.ravel_multi_index(idx, (dim,) * r))
        return np.array(reps)

    def describe(self):
        return [list(c) for c in self.copies]


# ---------------------------------------------------------------------------
# schemes and terms


def _close_group(gens, size):
    ident = tuple(range(size))
    seen = {ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for g in frontier:
            for h in gens:
                c = tuple(h[g[i]] for i in range(size))
                if c not in seen:
                    seen.add(c)
                    nxt.append(c)
        frontier = nxt
    return sorted(seen)


@dataclass(frozen=True)
class _Layout:
    owners: tuple  # ("b", i) / ("e", 0) / ("o", 0)
    nodes: tuple  # (owner index, slots, mode)
    autos: tuple


def _layout(mono, out_sig, eps_dim):
    blocks = mono.all_blocks
    owners, nodes, gens = [], [], []
    block_nodes = []
    for i, b in enumerate(blocks):
        owners.append(("b", i))
        first = len(nodes)
        for slots, mode in b.slot_groups:
            nodes.append((len(owners) - 1, slots, mode))
        block_nodes.append(list(range(first, len(nodes))))
    if eps_dim:
        owners.append(("e", 0))
        nodes.append((len(owners) - 1, tuple(range(eps_dim)), "anti"))
    owners.append(("o", 0))
    out_first = len(nodes)
    for slots, mode in out_sig.nodes():
        nodes.append((len(owners) - 1, slots, mode))
    v = len(nodes)
    # identical block instances are interchangeable
    for i in range(len(blocks) - 1):
        if blocks[i] == blocks[i + 1]:
            p = list(range(v))
            for a, c in zip(block_nodes[i], block_nodes[i + 1]):
                p[a], p[c] = c, a
            gens.append(tuple(p))
    for i, b in enumerate(blocks):
        for swap in b.group_swaps:
            p = list(range(v))
            for k, t in enumerate(swap):
                p[block_nodes[i][k]] = block_nodes[i][t]
            gens.append(tuple(p))
    for g in out_sig.node_generators():
        p = list(range(v))
        for k, t in enumerate(g):
            p[out_first + k] = out_first + t
        gens.append(tuple(p))
    return _Layout(tuple(owners), tuple(nodes), tuple(_close_group(gens, v)))


def _pairs_from_key(layout, key):
    v = len(layout.nodes)
    ptr = [0] * v
    pairs = []

    def take(i):
        owner, slots, _ = layout.nodes[i]
        s = slots[ptr[i]]
        ptr[i] += 1
        return (owner, s)

    k = 0
    for i in range(v):
        for j in range(i, v):
            for _ in range(key[k] if key else 0):
                pairs.append((take(i), take(j)))
            k += 1
    return tuple(pairs)


@dataclass(frozen=True)
class ContractionScheme:
    """A complete pairing of all slots; slots are ``(owner index, slot)``.

    ``owners`` names each owner: ``("b", i)`` for block ``i`` of the monomial,
    ``("e", 0)`` for the Levi-Civita symbol, ``("o", 0)`` for the output.
    Pairs listed in ``unbridged`` are summed without a metric factor; this
    only exists to build deliberately broken schemes for negative controls.
    """

    owners: tuple
    pairs: tuple
    output: OutputSignature
    epsilon_count: int = 0
    key: tuple = ()
    unbridged: frozenset = frozenset()

    def describe(self):
        names = ["%s%d" % o if o[0] == "b" else o[0] for o in self.owners]
        return {
            "epsilon": self.epsilon_count,
            "pairs": [[[names[a[0]], a[1]], [names[b[0]], b[1]]] for a, b in self.pairs],
        }


@dataclass(frozen=True)
class Term:
    monomial: Monomial
    scheme: ContractionScheme
    dim: int

    @cached_property
    def display(self):
        return render_term(self)

    def describe(self):
        d = {
            "display": self.display,
            "blocks": [b.describe() for b in self.monomial.blocks],
            "marginal_blocks": [b.describe() for b in self.monomial.marginal_blocks],
        }
        d.update(self.scheme.describe())
        return d

    @property
    def output(self):
        return self.scheme.output

    def evaluate_batch(self, fetch, count):
        return _eval_batch(self, fetch, count, _plan(self, diagonal=True))

    @property
    def has_epsilon(self):
        return self.scheme.epsilon_count > 0

    def owner_block(self, owner_index):
        kind, i = self.scheme.owners[owner_index]
        if kind == "b":
            return self.monomial.all_blocks[i]
        if kind == "e":
            return levi_civita_block(self.dim)
        return None

    def __repr__(self):
        return "Term(%s)" % self.display


def _cross_edges(layout, key):
    # pairings between the two slot groups of one curvature block: these are
    # proportional to traces inside the second group, so they sort last
    v = len(layout.nodes)
    count, k = 0, 0
    for i in range(v):
        for j in range(i, v):
            if key[k] and i != j and layout.nodes[i][0] == layout.nodes[j][0]:
                count += key[k]
            k += 1
    return count


def enumerate_schemes(mono, out_sig, oriented=False, dim=4):
    """All complete contraction schemes of ``mono`` into ``out_sig``.

    Up to block-internal symmetries, exchange of identical blocks, the
    curvature pair exchange and the output symmetry. At most one
    Levi-Civita symbol, and only when ``oriented``.
    """
    terms = []
    nslots = mono.slot_count + out_sig.rank
    for eps in ((0, dim) if oriented else (0,)):
        if (nslots + eps) % 2:
            continue
        layout = _layout(mono, out_sig, eps)
        sizes = [len(s) for _, s, _ in layout.nodes]
        anti = [mode == "anti" for _, _, mode in layout.nodes]
        keys = enumerate_multigraphs(sizes, anti, [list(a) for a in layout.autos])
        found = []
        for key in keys:
            pairs = _pairs_from_key(layout, key)
            sch = ContractionScheme(layout.owners, pairs, out_sig, 1 if eps else 0, tuple(key))
            found.append((_cross_edges(layout, key), tuple(key), Term(mono, sch, dim)))
        found.sort(key=lambda x: (x[0], x[1]))
        terms.extend(t for _, _, t in found)
    return terms


# ---------------------------------------------------------------------------
# evaluation


def _minkowski_signs(dim):
    s = np.ones(dim, dtype=np.int64)
    s[0] = -1
    return s


def _epsilon_array(dim):
    e = np.zeros((dim,) * dim, dtype=np.int64)
    for p in itertools.permutations(range(dim)):
        e[p] = _perm_sign(p)
    return e


_EPS_CACHE = {}


def _epsilon(dim):
    if dim not in _EPS_CACHE:
        _EPS_CACHE[dim] = _epsilon_array(dim)
    return _EPS_CACHE[dim]


@dataclass
class _Plan:
    operands: list  # ("block", owner) | ("eps",) | ("ginv",) | ("g",) | ("sign",)
    labels: list
    out_labels: str
    nsummed: int


def _plan(term, diagonal):
    sch = term.scheme
    letters = iter(_LETTERS)
    out_owner = next(i for i, o in enumerate(sch.owners) if o[0] == "o")
    r = sch.output.rank
    out_lab = [next(letters) for _ in range(r)]
    slot_lab = {}
    extra = []
    nsummed = 0
    for pi, (a, b) in enumerate(sch.pairs):
        ao, bo = a[0] == out_owner, b[0] == out_owner
        if ao and bo:
            extra.append((("g",), out_lab[a[1]] + out_lab[b[1]]))
        elif ao:
            slot_lab[b] = out_lab[a[1]]
        elif bo:
            slot_lab[a] = out_lab[b[1]]
        elif pi in sch.unbridged:
            x = next(letters)
            slot_lab[a] = slot_lab[b] = x
            nsummed += 1
        elif diagonal:
            x = next(letters)
            slot_lab[a] = slot_lab[b] = x
            extra.append((("sign",), x))
            nsummed += 1
        else:
            x, y = next(letters), next(letters)
            slot_lab[a], slot_lab[b] = x, y
            extra.append((("ginv",), x + y))
            nsummed += 2
    ops, labs = [], []
    for oi, o in enumerate(sch.owners):
        if o[0] == "o":
            continue
        blk = term.owner_block(oi)
        lab = "".join(slot_lab[(oi, s)] for s in range(blk.rank))
        ops.append(("eps",) if o[0] == "e" else ("block", oi))
        labs.append(lab)
    for op, lab in extra:
        ops.append(op)
        labs.append(lab)
    return _Plan(ops, labs, "".join(out_lab), nsummed)


def _maxabs(a):
    if a.size == 0:
        return 0
    if a.dtype == object:
        return max(abs(int(x)) for x in a.flat)
    return int(np.abs(a).max())


def _run_plan(term, plan, fetch, metric, inv_metric, eps_scale, batch):
    dim = term.dim
    arrays, specs = [], []
    for op, lab in zip(plan.operands, plan.labels):
        if op[0] == "block":
            arr, is_batched = fetch(term.owner_block(op[1]))
            if is_batched:
                lab = _BATCH + lab
        elif op[0] == "eps":
            arr = _epsilon(dim) * eps_scale
        elif op[0] == "g":
            arr = metric
        elif op[0] == "ginv":
            arr = inv_metric
        else:
            arr = _minkowski_signs(dim)
        arrays.append(arr)
        specs.append(lab)
    out = plan.out_labels
    if batch is not None:
        arrays.append(np.ones(batch, dtype=np.int64))
        specs.append(_BATCH)
        out = _BATCH + out
    if not arrays:
        return np.array(1, dtype=np.int64)
    bound = dim ** plan.nsummed
    for a in arrays:
        bound *= max(_maxabs(a), 1)
    if bound >= _INT64_SAFE:
        arrays = [np.asarray(a).astype(object) for a in arrays]
        res = np.einsum(",".join(specs) + "->" + out, *arrays, optimize="greedy" if len(arrays) > 2 else False)
    else:
        arrays = [np.asarray(a, dtype=np.int64) for a in arrays]
        res = np.einsum(",".join(specs) + "->" + out, *arrays, optimize="greedy" if len(arrays) > 2 else False)
    return np.asarray(res)


def _symmetrize_sum(arr, sig, lead):
    # sum (not average) over the output automorphism group; ``lead`` leading batch axes
    for fac in sig.slot_factors():
        acc = None
        for p in fac:
            axes = list(range(lead)) + [lead + p[i] for i in range(len(p))]
            t = np.transpose(arr, axes)
            acc = t.copy() if acc is None else acc + t
        arr = acc
    return arr


def _metric_data(metric, dim):
    """Integer numerators and denominators of ``g``, ``g^-1`` and ``sqrt|det g|``."""
    if metric is None:
        g = np.diag(_minkowski_signs(dim))
        return (g, 1), (g, 1), (1, 1)
    from .tensor import _det, _inverse, _matrix_tensor, exact_root

    rows = [[Fraction(x) for x in row] for row in metric.to_fractions().tolist()]
    root = exact_root(abs(_det(rows)), 2)
    if root is None:
        raise ValueError("|det g| must be a rational square for an exact ε")
    inv = _matrix_tensor(_inverse(rows), dim)
    return (metric.num, metric.den), (inv.num, inv.den), (root.numerator, root.denominator)


def evaluate_term(term, block_values, metric=None):
    """Exact value of ``term`` on the given block values.

    ``block_values`` maps each :class:`Block` of the monomial to an
    all-lower-index :class:`DenseTensor`. ``metric`` (a covariant rank-2
    DenseTensor) defaults to η = diag(-1, 1, ..., 1); ε is taken as
    ``sqrt|det g|`` times the permutation symbol.
    """
    dim = term.dim
    vals = {}
    for b in set(term.monomial.all_blocks):
        if b not in block_values:
            raise KeyError("no value for block %s" % b.name)
        v = block_values[b]
        if v.rank != b.rank or v.dim != dim:
            raise ValueError("value for %s must have rank %d in dim %d" % (b.name, b.rank, dim))
        vals[b] = v
    (g, gd), (gi, gid), (en, ed) = _metric_data(metric, dim)
    plan = _plan(term, diagonal=metric is None)
    den = 1
    for op in plan.operands:
        if op[0] == "block":
            den *= vals[term.owner_block(op[1])].den
        elif op[0] == "g":
            den *= gd
        elif op[0] == "ginv":
            den *= gid
        elif op[0] == "eps":
            den *= ed

    def fetch(b):
        return vals[b].num, False

    arr = _run_plan(term, plan, fetch, g, gi, en, None)
    arr = _symmetrize_sum(arr, term.scheme.output, 0)
    order = term.scheme.output.group_order()
    return DenseTensor(arr, den * order, dim=dim, variance=(CO,) * term.scheme.output.rank)


def _eval_batch(term, fetch, batch, plan):
    eta = np.diag(_minkowski_signs(term.dim))
    arr = _run_plan(term, plan, fetch, eta, eta, 1, batch)
    return _symmetrize_sum(arr, term.scheme.output, 1)


# ---------------------------------------------------------------------------
# reduction


@dataclass
class Basis:
    terms: list
    witness: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.terms)

    def displays(self):
        return [t.display for t in self.terms]


def _group_seed(seed, tag, *extra):
    return np.random.SeedSequence([seed, zlib.crc32(tag.encode())] + list(extra))


def _sample_values(blocks, dim, ss, count):
    """Integer values for each block: ``{block: (count, n, ..., n) array}``."""
    rng = np.random.default_rng(ss)
    out = {}
    for b in blocks:
        seeds = rng.integers(0, 2**32, size=count)
        out[b] = np.stack([random_in_symmetry(b.symmetry, dim, int(s)).num.astype(np.int64) for s in seeds])
    return out


def _block_tag(blocks):
    return "|".join("%s/%d/%s" % (b.kind, b.nderiv, b.background.name if b.background else "") for b in blocks)


class _Group:
    """Evaluation table of one homogeneity class of candidate terms."""

    def __init__(self, terms, dim, seed, tag):
        self.terms = terms
        self.dim = dim
        self.seed = seed
        self.tag = tag
        self.sig = terms[0].scheme.output
        self.reps = self.sig.representatives(dim)
        self.plans = [_plan(t, diagonal=True) for t in terms]
        self.free = sorted({b for t in terms for b in t.monomial.blocks}, key=Block.sort_key)
        self.marg = sorted({b for t in terms for b in t.monomial.marginal_blocks}, key=Block.sort_key)

    def columns(self, fixed, batch_id, count):
        varying = self.free + [b for b in self.marg if b not in fixed]
        vals = _sample_values(varying, self.dim, _group_seed(self.seed, self.tag, 1, batch_id), count)

        def fetch(b):
            if b in vals:
                return vals[b], True
            return fixed[b], False

        cols = []
        for t, plan in zip(self.terms, self.plans):
            arr = _eval_batch(t, fetch, count, plan)
            flat = arr.reshape(count, -1)[:, self.reps]
            cols.append(flat.reshape(-1))
        return np.stack(cols, axis=1)

    def sample(self, fixed, samples, salt):
        """Evaluation rows, grown by ``samples`` points until a batch adds no rank.

        Growth is judged by one modular rank per step; returns the stacked
        matrix and the number of sample points used.
        """
        batch_id = salt * 1000
        rows = [self.columns(fixed, batch_id, samples)]
        n_used = samples
        rank = len(modular_pivots(_stack(rows)))
        while True:
            batch_id += 1
            rows.append(self.columns(fixed, batch_id, samples))
            n_used += samples
            new = len(modular_pivots(_stack(rows)))
            if new == rank:
                return _stack(rows), n_used
            rank = new

    def pivots(self, fixed, samples, salt):
        """Greedy pivots of the sampled matrix, certified over Q."""
        mat, n_used = self.sample(fixed, samples, salt)
        piv, certified = certified_pivots(mat)
        return piv, n_used, certified


def _stack(row_blocks):
    mats = [np.asarray(r) for r in row_blocks]
    if any(m.dtype == object for m in mats):
        return np.concatenate([m.astype(object) for m in mats], axis=0)
    return np.concatenate(mats, axis=0)


def reduce_basis(terms, marginal_mode=False, samples=5, seed=0):
    """Greedy left-to-right independent subset of ``terms``.

    Terms are split by their multiset of non-marginal blocks (evaluations of
    different multidegree cannot cancel). In each class the sample count is
    raised until a fresh batch no longer increases the rank. In marginal
    mode the marginal blocks are frozen at ``samples`` random values; a term
    is kept iff it is independent of the earlier terms at one of them.
    """
    terms = list(terms)
    if not terms:
        return Basis([], {"seed": seed, "samples": samples, "groups": []})
    sigs = {t.scheme.output for t in terms}
    if len(sigs) != 1:
        raise ValueError("reduce_basis needs terms with one output signature")
    dim = terms[0].dim
    groups = {}
    for i, t in enumerate(terms):
        groups.setdefault(t.monomial.blocks, []).append(i)
    keep = set()
    witness = []
    for key in sorted(groups, key=lambda k: min(groups[k])):
        idx = groups[key]
        tag = _block_tag(key)
        grp = _Group([terms[i] for i in idx], dim, seed, tag)
        info = {"blocks": [b.name for b in key], "candidates": len(idx)}
        certified = True
        if marginal_mode and grp.marg:
            chosen = set()
            used = []
            for z in range(samples):
                fixed = _sample_values(grp.marg, dim, _group_seed(seed, "marginal", z), 1)
                fixed = {b: v[0] for b, v in fixed.items()}
                piv, n_used, cert = grp.pivots(fixed, samples, z + 1)
                chosen.update(piv)
                used.append(n_used)
                certified = certified and cert
            info["marginal_values"] = samples
            info["sample_points"] = used
        else:
            piv, n_used, certified = grp.pivots({}, samples, 0)
            chosen = set(piv)
            info["sample_points"] = [n_used]
        info["kept"] = len(chosen)
        info["certified"] = certified
        witness.append(info)
        keep.update(idx[c] for c in chosen)
    kept = [terms[i] for i in sorted(keep)]
    return Basis(kept, {"seed": seed, "samples": samples, "marginal_mode": marginal_mode, "groups": witness})


def in_span(basis_terms, candidates, marginal_mode=False, samples=5, seed=0):
    """For each candidate, whether it lies in the span of ``basis_terms``.

    Candidates may be :class:`Term` objects or anything with the same
    ``monomial``, ``output``, ``dim`` and ``evaluate_batch(fetch, count)``.
    In marginal mode the span is taken over the invariant ring: a candidate
    is contained iff it is dependent at every frozen marginal value.
    """
    basis_terms, candidates = list(basis_terms), list(candidates)
    out = [False] * len(candidates)
    if not basis_terms or not candidates:
        return out
    dim = basis_terms[0].dim
    sig = basis_terms[0].output
    groups = {}
    for t in basis_terms:
        groups.setdefault(t.monomial.blocks, ([], []))[0].append(t)
    for j, c in enumerate(candidates):
        if c.output != sig:
            raise ValueError("candidate %r has a different output signature" % (c,))
        groups.setdefault(c.monomial.blocks, ([], []))[1].append(j)
    for key, (base, cidx) in groups.items():
        if not base or not cidx:
            continue
        items = base + [candidates[j] for j in cidx]
        grp = _MixedGroup(items, dim, seed, _block_tag(key), sig)
        zs = range(samples) if marginal_mode and grp.marg else [None]
        contained = [True] * len(cidx)
        nb = len(base)
        for z in zs:
            fixed = {}
            if z is not None:
                fixed = _sample_values(grp.marg, dim, _group_seed(seed, "marginal", z), 1)
                fixed = {b: v[0] for b, v in fixed.items()}
            mat, _ = grp.sample(fixed, samples, 0 if z is None else z + 1)
            rb = len(certified_pivots(mat[:, :nb])[0])
            for i in range(len(cidx)):
                if contained[i]:
                    sub = np.concatenate([mat[:, :nb], mat[:, nb + i:nb + i + 1]], axis=1)
                    contained[i] = len(certified_pivots(sub)[0]) == rb
        for i, j in enumerate(cidx):
            out[j] = contained[i]
    return out


def reduce_basis_mixed(items, marginal_mode=False, samples=5, seed=0):
    """Pivot indices of the greedy reduction over Terms and expression terms."""
    terms = list(items)
    dim = terms[0].dim
    sig = terms[0].output
    groups = {}
    for i, t in enumerate(terms):
        groups.setdefault(t.monomial.blocks, []).append(i)
    keep = set()
    for key, idx in groups.items():
        tag = _block_tag(key)
        grp = _MixedGroup([terms[i] for i in idx], dim, seed, tag, sig)
        if marginal_mode and grp.marg:
            chosen = set()
            for z in range(samples):
                fixed = _sample_values(grp.marg, dim, _group_seed(seed, "marginal", z), 1)
                fixed = {b: v[0] for b, v in fixed.items()}
                chosen.update(grp.pivots(fixed, samples, z + 1)[0])
        else:
            chosen = set(grp.pivots({}, samples, 0)[0])
        keep.update(idx[c] for c in chosen)
    return sorted(keep)


class _MixedGroup(_Group):
    def __init__(self, terms, dim, seed, tag, sig):
        self.terms = terms
        self.dim = dim
        self.seed = seed
        self.tag = tag
        self.sig = sig
        self.reps = sig.representatives(dim)
        self.free = sorted({b for t in terms for b in t.monomial.blocks}, key=Block.sort_key)
        self.marg = sorted({b for t in terms for b in t.monomial.marginal_blocks}, key=Block.sort_key)

    def columns(self, fixed, batch_id, count):
        varying = self.free + [b for b in self.marg if b not in fixed]
        vals = _sample_values(varying, self.dim, _group_seed(self.seed, self.tag, 1, batch_id), count)

        def fetch(b):
            if b in vals:
                return vals[b], True
            return fixed[b], False

        cols = []
        for t in self.terms:
            arr = t.evaluate_batch(fetch, count)
            cols.append(arr.reshape(count, -1)[:, self.reps].reshape(-1))
        mats = cols
        if any(c.dtype == object for c in mats):
            mats = [c.astype(object) for c in mats]
        return np.stack(mats, axis=1)


def module_redundant(term):
    """Structural test for terms that are invariant-ring multiples of others.

    True when the pairing graph has a connected piece made only of
    undifferentiated marginal blocks (a scalar invariant factor), or a path
    of at least ``n`` marginal symmetric 2-tensors (a matrix power that
    Cayley-Hamilton lowers). Both are combinations, with invariant
    coefficients, of terms with fewer marginal blocks.
    """
    sch = term.scheme
    owners = sch.owners
    parent = list(range(len(owners)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    adj = {}
    for a, b in sch.pairs:
        parent[find(a[0])] = find(b[0])
        if a[0] != b[0]:
            adj.setdefault(a[0], []).append(b[0])
            adj.setdefault(b[0], []).append(a[0])
    marginal = [False] * len(owners)
    chainable = [False] * len(owners)
    for i, o in enumerate(owners):
        if o[0] == "b":
            blk = term.monomial.all_blocks[o[1]]
            marginal[i] = blk.marginal
            chainable[i] = blk.marginal and blk.rank == 2 and blk.background.symmetry == "symmetric"
    comps = {}
    for i in range(len(owners)):
        comps.setdefault(find(i), []).append(i)
    for members in comps.values():
        if all(marginal[i] for i in members):
            return True
    # longest run of chainable nodes along paths (each has two neighbours)
    seen = set()
    for i in range(len(owners)):
        if not chainable[i] or i in seen:
            continue
        run = {i}
        stack = [i]
        while stack:
            x = stack.pop()
            for y in adj.get(x, []):
                if chainable[y] and y not in run:
                    run.add(y)
                    stack.append(y)
        seen |= run
        if len(run) >= term.dim:
            return True
    return False


# ---------------------------------------------------------------------------
# equivariance


def random_unimodular(dim, rng, det=1, steps=None):
    """Integer matrix with determinant ``det`` (±1): shears times a signed permutation."""
    steps = steps if steps is not None else 2 * dim
    u = np.eye(dim, dtype=object)
    for _ in range(steps):
        i, j = rng.choice(dim, size=2, replace=False)
        c = int(rng.integers(-2, 3))
        e = np.eye(dim, dtype=object)
        e[i, j] = c
        u = u.dot(e)
    perm = rng.permutation(dim)
    p = np.zeros((dim, dim), dtype=object)
    for i, j in enumerate(perm):
        p[i, j] = 1 if rng.integers(0, 2) else -1
    u = u.dot(p)
    d = _int_det(u)
    if d != det:
        u[:, 0] = -u[:, 0]
    return u


def _int_det(u):
    from .tensor import _det

    return int(_det([[Fraction(int(x)) for x in row] for row in u.tolist()]))


def _random_values(term, rng):
    vals = {}
    for b in sorted(set(term.monomial.all_blocks), key=Block.sort_key):
        vals[b] = random_in_symmetry(b.symmetry, term.dim, int(rng.integers(0, 2**32)))
    return vals


def _eta(dim):
    return DenseTensor(np.diag(_minkowski_signs(dim)), 1, dim)


def equivariance_check(term, trials=50, seed=0):
    """Exact GL(n)-equivariance test of a term on random unimodular matrices.

    Block values and the metric are transformed together. Terms containing
    ε must pick up the sign of ``det u``, which one extra ``det u = -1``
    trial checks.
    """
    rng = np.random.default_rng(seed)
    eta = _eta(term.dim)
    for t in range(trials + 1):
        det = -1 if t == trials else 1
        u = random_unimodular(term.dim, rng, det)
        vals = _random_values(term, rng)
        base = evaluate_term(term, vals)
        moved = {b: transform(v, u) for b, v in vals.items()}
        g2 = transform(eta, u)
        lhs = evaluate_term(term, moved, metric=g2)
        rhs = transform(base, u)
        if det == -1 and term.has_epsilon:
            rhs = -rhs
        if lhs != rhs:
            return False
    return True


def homogeneity_evaluator(term):
    """Evaluator for :func:`check_homogeneity`.

    Every block value is scaled by λ to its physical weight and the metric
    by λ^-2; the term is then evaluated on the scaled data.
    """
    from .scaling import scale_factor

    def ev(lam, seed):
        rng = np.random.default_rng(seed)
        vals = _random_values(term, rng)
        scaled = {b: v.scale(scale_factor(lam, b.phys_weight)) for b, v in vals.items()}
        metric = _eta(term.dim).scale(scale_factor(lam, -2))
        return evaluate_term(term, scaled, metric=metric)

    return ev


def term_degree(term):
    """Physical scaling degree of a term read off its blocks and pairings."""
    sch = term.scheme
    out_owner = next(i for i, o in enumerate(sch.owners) if o[0] == "o")
    deg = sum((b.phys_weight for b in term.monomial.all_blocks), Fraction(0))
    for a, b in sch.pairs:
        ao, bo = a[0] == out_owner, b[0] == out_owner
        if ao and bo:
            deg -= 2
        elif not ao and not bo:
            deg += 2
    return deg - term.dim * sch.epsilon_count


# ---------------------------------------------------------------------------
# rendering

_SUPER = str.maketrans("0123456789", "⁰¹²³⁴⁵⁶⁷⁸⁹")


def render_term(term):
    """Abstract-index rendering of a term.

    All indices are written down; a repeated letter is contracted with the
    inverse Minkowski metric. ``∇_{ab}`` is the symmetrized covariant
    derivative coordinate and ``□`` its trace; ``S_{ab|cd…}`` is the
    curvature coordinate. Output indices a, b, … are symmetrized as the
    output signature requires, shown with round brackets when spread over
    several factors.
    """
    sch = term.scheme
    out_owner = next(i for i, o in enumerate(sch.owners) if o[0] == "o")
    r = sch.output.rank
    out_letters = _LETTERS[:r]
    pool = iter(_LETTERS[r:])
    lab = {}
    metric_factors = []
    for a, b in sch.pairs:
        ao, bo = a[0] == out_owner, b[0] == out_owner
        if ao and bo:
            metric_factors.append(out_letters[a[1]] + out_letters[b[1]])
        elif ao:
            lab[b] = out_letters[a[1]]
        elif bo:
            lab[a] = out_letters[b[1]]
        else:
            x = next(pool)
            lab[a] = lab[b] = x
    factors = ["g_{%s}" % m for m in metric_factors]
    eps_factor = []
    for oi, o in enumerate(sch.owners):
        if o[0] == "o":
            continue
        blk = term.owner_block(oi)
        letters = [lab[(oi, s)] for s in range(blk.rank)]
        text = _render_block(blk, letters)
        (eps_factor if o[0] == "e" else factors).append(text)
    parts = eps_factor + factors
    text = " ".join(parts) if parts else "1"
    return _bracket_outputs(text, sch.output, out_letters)


def _render_block(blk, letters):
    if blk.kind == LEVI_CIVITA:
        return "ε_{%s}" % "".join(letters)
    if blk.kind == CURVATURE:
        first, second = letters[:2], letters[2:]
        if blk.nderiv == 0:
            loop1 = first[0] == first[1]
            loop2 = second[0] == second[1]
            if loop1 and loop2:
                return "R"
            if loop1:
                return "Ric_{%s}" % "".join(second)
            if loop2:
                return "Ric_{%s}" % "".join(first)
        return "S_{%s|%s}" % ("".join(first), "".join(second))
    if blk.kind == BACKGROUND:
        l = blk.background.rank
        fld, der = letters[:l], letters[l:]
        boxes, rest = _pull_traces(der)
        name = blk.background.label
        s = ""
        if rest:
            s += "∇_{%s}" % "".join(rest)
        if boxes:
            s += "□" if boxes == 1 else "□" + str(boxes).translate(_SUPER)
        s += name
        if fld:
            s += "_{%s}" % "".join(fld)
        return s
    return blk.name + "_{%s}" % "".join(letters)


def _pull_traces(letters):
    seen = {}
    for x in letters:
        seen[x] = seen.get(x, 0) + 1
    boxes = sum(c // 2 for c in seen.values())
    rest = []
    for x in letters:
        if seen[x] % 2 == 1 and x not in rest:
            rest.append(x)
    return boxes, rest


def _bracket_outputs(text, sig, out_letters):
    pos = 0
    for q, k in sig.copies:
        if k == 1 and q > 1:
            group = out_letters[pos:pos + q]
            locs = [i for i, ch in enumerate(text) if ch in group and _is_index(text, i)]
            # only bracket when the letters are spread over several factors
            if locs and not _same_factor(text, locs):
                first, last = locs[0], locs[-1]
                text = text[:first] + "(" + text[first:last + 1] + ")" + text[last + 1:]
        pos += q * k
    return text


def _is_index(text, i):
    # inside a _{...} group
    j = text.rfind("{", 0, i)
    k = text.rfind("}", 0, i)
    return j > k and j >= 1 and text[j - 1] == "_"


def _same_factor(text, locs):
    return text.count(" ", locs[0], locs[-1]) == 0
