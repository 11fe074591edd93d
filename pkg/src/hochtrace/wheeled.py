"""Wheeled trees, the free shifted-C-infinity algebra, the directed
one-loop graph complex, and the wheel evaluation map.

The biarity-(n,0) part of the wheeled envelope of C-infinity is realized
through its cycle-tree dictionary: a cycle tree is a cyclic tuple of bar
words whose letters are shuffle-reduced rooted trees (the branch
decorations), i.e. the Connes complex of the bar construction of the
free multilinear shifted-C-infinity algebra on n letters.  All signs are
Koszul; d^2 = 0 is asserted by construction.

Tree normal form (the (k-1)!-basis of Q[Sigma_k]/shuffles): at every
vertex the child containing the smallest letter sits in the last slot;
the remaining children are ordered, and distinct orders are distinct
basis elements.
"""
from __future__ import annotations

from fractions import Fraction
from itertools import permutations, product

from .ainf import AInfAlgebra, check_stasheff
from .cdga import BaseCDGA
from .grdlin import (
    Complex,
    GradedMap,
    GradedSpace,
    HomologyBasis,
    ONE,
    enumerate_shuffles,
    is_chain_map,
    koszul_sign,
    sparse_rank,
    vec_add,
)
from .hoch import BarConnesComplex, ConnesComplex, hc_complex, rotation_to_bar_hc
from .report import Report

ZERO = Fraction(0)


# --- shuffle-reduced trees -------------------------------------------------------


def leaf(letter):
    return ("leaf", letter)


def node(children):
    return ("node", tuple(children))


def tree_letters(tree):
    kind, payload = tree
    if kind == "leaf":
        return frozenset([payload])
    out = frozenset()
    for child in payload:
        out |= tree_letters(child)
    return out


def tree_vertices(tree):
    kind, payload = tree
    if kind == "leaf":
        return 0
    return 1 + sum(tree_vertices(child) for child in payload)


def tree_degree(tree):
    """Vertices carry degree +1, letters degree -1 (the sC convention on
    degree-zero hair letters)."""
    return tree_vertices(tree) - len(tree_letters(tree))


def tree_min(tree):
    return min(tree_letters(tree))


def _normalize_children(children) -> dict:
    """Rewrite a child tuple so the minimal-letter child is last, using the
    shuffle relations; returns {child tuple: coefficient}."""
    children = tuple(children)
    k = len(children)
    j = min(range(k), key=lambda i: tree_min(children[i]))
    if j == k - 1:
        return {children: ONE}
    # shuffle relation with p = j + 1: the identity shuffle keeps the
    # designated child at position j; all other (p, q)-shuffles push it right
    p = j + 1
    q = k - p
    degrees = [tree_degree(c) for c in children]
    out = {}
    for sigma in enumerate_shuffles(p, q):
        if sigma.perm == tuple(range(k)):
            continue
        sign = koszul_sign(sigma, degrees)
        permuted = sigma.apply_to(children)
        for child_tuple, c in _normalize_children(permuted).items():
            vec_add(out, {child_tuple: -sign * c})
    return out


def normalize_tree(tree) -> dict:
    """Bring every vertex of a tree to normal form; {tree: coefficient}."""
    kind, payload = tree
    if kind == "leaf":
        return {tree: ONE}
    # normalize children first (multilinear expansion)
    expansions = [((), ONE)]
    for child in payload:
        norm = normalize_tree(child)
        expansions = [(acc + (t,), c * q)
                      for acc, c in expansions for t, q in norm.items()]
    out = {}
    for children, coeff in expansions:
        for child_tuple, c in _normalize_children(children).items():
            vec_add(out, {node(child_tuple): coeff * c})
    return out


def graft(subtrees) -> dict:
    """mu_k applied to a tuple of normal trees: the new root, normalized."""
    if len(subtrees) < 2:
        raise ValueError("generators have arity >= 2")
    out = {}
    for child_tuple, c in _normalize_children(tuple(subtrees)).items():
        vec_add(out, {node(child_tuple): c})
    return out


def tree_differential(tree) -> dict:
    """The free-algebra differential: the derivation extending
    d(mu_k) = - sum mu_{r+1+t} o_{r+1} mu_s (1 < s < k).

    Signs: linearize the expression in prefix order (a vertex before its
    children); expanding the vertex at prefix degree P into
    mu_{r+1+t} o_{r+1} mu_s moves the odd inner symbol past the first r
    children, so the term carries (-1)^{P + |c_1| + .. + |c_r| + 1}.
    """
    out = {}
    entries = []   # (path, prefix degree of the vertex symbol)

    def walk(t, path, prefix):
        kind, payload = t
        if kind == "leaf":
            return prefix - 1
        entries.append((path, prefix))
        prefix = prefix + 1
        for i, child in enumerate(payload):
            prefix = walk(child, path + (i,), prefix)
        return prefix

    walk(tree, (), 0)

    def replace(t, path, value_tree):
        if not path:
            return value_tree
        _kind, payload = t
        i = path[0]
        return node(payload[:i] + (replace(payload[i], path[1:], value_tree),)
                    + payload[i + 1:])

    def subtree(t, path):
        if not path:
            return t
        return subtree(t[1][path[0]], path[1:])

    for path, prefix in entries:
        payload = subtree(tree, path)[1]
        k = len(payload)
        child_degs = [tree_degree(c) for c in payload]
        for s in range(2, k):
            for r in range(0, k - s + 1):
                exponent = prefix + sum(child_degs[:r]) + 1
                sign = -ONE if exponent % 2 else ONE
                inner = node(payload[r:r + s])
                expanded = node(payload[:r] + (inner,) + payload[r + s:])
                rebuilt = replace(tree, path, expanded)
                for t2, c in normalize_tree(rebuilt).items():
                    vec_add(out, {t2: sign * c})
    return out


def multilinear_trees(letters) -> list:
    """All shuffle-normal trees with leaf set exactly ``letters``."""
    letters = tuple(sorted(letters))
    if len(letters) == 1:
        return [leaf(letters[0])]
    out = []
    collected = set()
    for k in range(2, len(letters) + 1):
        for blocks in _set_partitions(letters, k):
            subtree_choices = [multilinear_trees(tuple(b)) for b in blocks]
            for combo in product(*subtree_choices):
                j = min(range(k), key=lambda i: tree_min(combo[i]))
                rest = [combo[i] for i in range(k) if i != j]
                for ordered_rest in permutations(rest):
                    candidate = node(tuple(ordered_rest) + (combo[j],))
                    if candidate not in collected:
                        collected.add(candidate)
                        out.append(candidate)
    return out


def _set_partitions(items, k):
    """Partitions of ``items`` into exactly k nonempty blocks (as tuples of
    sorted tuples, order of blocks canonical by minimum)."""
    items = list(items)
    if k == 1:
        if items:
            yield (tuple(items),)
        return
    if len(items) < k:
        return
    first, rest = items[0], items[1:]
    # first goes into a block with some subset of rest
    n = len(rest)
    for mask in range(1 << n):
        block = [first] + [rest[i] for i in range(n) if mask >> i & 1]
        remaining = [rest[i] for i in range(n) if not mask >> i & 1]
        for others in _set_partitions(remaining, k - 1):
            yield (tuple(block),) + others


def free_multilinear_algebra(n) -> AInfAlgebra:
    """The free shifted-C-infinity algebra on n degree-(-1) letters,
    restricted to multilinear words (a genuine A-infinity algebra: zero
    structure maps on overlapping supports)."""
    base = BaseCDGA.rationals()
    letters = tuple(range(1, n + 1))
    all_trees = []
    for size in range(1, n + 1):
        for support in _subsets(letters, size):
            all_trees.extend(multilinear_trees(support))
    gens = GradedSpace(((t, tree_degree(t)) for t in all_trees))
    mu = {}
    d_table = {}
    for t in all_trees:
        col = tree_differential(t)
        if col:
            d_table[(t,)] = {("1", t2): c for t2, c in col.items()}
    if d_table:
        mu[1] = d_table
    for k in range(2, n + 1):
        table = {}
        for combo in _disjoint_tuples(all_trees, k, set(letters)):
            value = graft(combo)
            if value:
                table[combo] = {("1", t2): c for t2, c in value.items()}
        if table:
            mu[k] = table
    return AInfAlgebra(base, gens, mu, n_max=n, cinfty=True)


def _subsets(items, size):
    from itertools import combinations
    for c in combinations(items, size):
        yield c


def _disjoint_tuples(trees, k, universe):
    """Tuples of k trees with pairwise disjoint letter supports."""
    def rec(chosen, used):
        if len(chosen) == k:
            yield tuple(chosen)
            return
        for t in trees:
            s = tree_letters(t)
            if s & used:
                continue
            yield from rec(chosen + [t], used | s)
    yield from rec([], frozenset())


# --- the loop-order-one graph complex ---------------------------------------------


def gc1_complex(n, check=True) -> BarConnesComplex:
    """C-infinity-wheel (n, 0) as the multilinear Connes complex of the bar
    of the free algebra (the Lemma-6.4.11 cycle-tree dictionary)."""
    algebra = free_multilinear_algebra(n)
    letters = frozenset(range(1, n + 1))

    def multilinear(words):
        seen = set()
        for w in words:
            for t in w:
                s = tree_letters(t)
                if s & seen:
                    return False
                seen |= s
        return seen == letters

    return BarConnesComplex(algebra, n, check=check, tuple_filter=multilinear)


def gc1_homology(n, characters=False):
    """Dimensions of H^k (k = n - #vertices) of the one-loop complex, and
    optionally the traces of the Sigma_n-action on each homology group."""
    cx = gc1_complex(n)
    dims = {}
    out_chars = {}
    for t in range(-(n - 1), 1):
        basis = HomologyBasis(cx.complex, t)
        k = -t
        if basis.dim:
            dims[k] = basis.dim
        if characters and basis.dim:
            out_chars[k] = {}
            for perm in _conjugacy_representatives(n):
                action = _letter_permutation_map(cx, perm)
                trace = ZERO
                for idx, rep in enumerate(basis.representatives):
                    coords = basis.coords(action(rep))
                    trace += coords.get(idx, ZERO)
                out_chars[k][perm] = trace
    for k in range(0, n):
        dims.setdefault(k, 0)
    if characters:
        return dims, out_chars
    return dims


def _conjugacy_representatives(n):
    """One permutation per cycle type (as one-line tuples, 1-based)."""
    from itertools import permutations as perms
    reps = {}
    for p in perms(range(1, n + 1)):
        # cycle type
        seen = set()
        lengths = []
        for start in range(1, n + 1):
            if start in seen:
                continue
            length = 0
            x = start
            while x not in seen:
                seen.add(x)
                x = p[x - 1]
                length += 1
            lengths.append(length)
        key = tuple(sorted(lengths))
        reps.setdefault(key, p)
    return sorted(reps.values())


def _relabel_tree(tree, perm):
    kind, payload = tree
    if kind == "leaf":
        return leaf(perm[payload - 1])
    return node(tuple(_relabel_tree(c, perm) for c in payload))


def _letter_permutation_map(cx: BarConnesComplex, perm) -> GradedMap:
    """The Sigma_n-action on the one-loop complex by hair relabeling
    (letters have degree -1... odd: relabeling itself carries no Koszul
    sign beyond tree renormalization)."""
    entries = {}
    for label in cx.space.labels():
        b, words = label
        expansions = [((), ONE)]
        for w in words:
            word_exp = [((), ONE)]
            for t in w:
                norm = normalize_tree(_relabel_tree(t, perm))
                word_exp = [(acc + (t2,), c * q)
                            for acc, c in word_exp for t2, q in norm.items()]
            expansions = [(acc + (tuple(wpart),), c * q)
                          for acc, c in expansions for wpart, q in word_exp]
        col = {}
        for new_words, c in expansions:
            tlabel, sign = cx.reduce_label(b, new_words)
            if tlabel is not None:
                vec_add(col, {tlabel: sign * c})
        if col:
            entries[label] = col
    return GradedMap(cx.space, cx.space, 0, entries)
