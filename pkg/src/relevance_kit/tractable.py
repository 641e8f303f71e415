"""Structured utilities on which relevance questions avoid full enumeration.

Covered here: bounded action sets, separable utilities, low tensor rank,
tree-structured and bounded-treewidth pairwise utilities, and utilities
invariant under permuting coordinates.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import comb
from typing import Iterable, Sequence

from .core import DecisionProblem, OptSet, Rational, argmax, coordset, enumerate_states, project, rational
from .errors import FormatError, SymmetryError
from .static import check_sufficiency
from .verdict import Pair, StepCounter, Verdict


def check_bounded_actions(problem: DecisionProblem, coords: Iterable[int],
                          counter: StepCounter | None = None) -> Verdict:
    """Pairwise sufficiency scan, reported against |S|^2 * |A|^2."""
    return check_sufficiency(problem, coords, "pairwise", counter)


# --------------------------------------------------------------------------
# Separable


def check_separable(problem: DecisionProblem):
    """Detect ``U(a, s) = f(a) + g(s)``; returns ``(True, f, g)`` or ``(False, None, None)``."""
    base = problem.utilities[0]
    f = []
    for row in problem.utilities:
        diff = row[0] - base[0]
        if any(u - b != diff for u, b in zip(row, base)):
            return False, None, None
        f.append(diff)
    opts = set(problem.opt_table)
    assert len(opts) == 1, "separable utility with a non-constant optimizer"
    return True, tuple(f), tuple(base)


# --------------------------------------------------------------------------
# Tensor rank


@dataclass(frozen=True)
class TensorRankUtility:
    """``U(a, s) = sum_r w_r * f_r(a) * prod_i g_ri(s_i)``."""

    actions: tuple[str, ...]
    domains: tuple[int, ...]
    weights: tuple[Rational, ...]
    action_factors: tuple[tuple[Rational, ...], ...] = field(repr=False)
    coord_factors: tuple[tuple[tuple[Rational, ...], ...], ...] = field(repr=False)

    def __post_init__(self):
        R = len(self.weights)
        object.__setattr__(self, "actions", tuple(self.actions))
        object.__setattr__(self, "domains", tuple(self.domains))
        object.__setattr__(self, "weights", tuple(rational(w) for w in self.weights))
        af = tuple(tuple(rational(x) for x in row) for row in self.action_factors)
        cf = tuple(tuple(tuple(rational(x) for x in g) for g in per_r) for per_r in self.coord_factors)
        if len(af) != R or any(len(row) != len(self.actions) for row in af):
            raise FormatError("action factors must be R x |A|")
        if len(cf) != R or any(len(per_r) != len(self.domains) for per_r in cf):
            raise FormatError("coordinate factors must be R x n")
        for per_r in cf:
            for g, d in zip(per_r, self.domains):
                if len(g) != d:
                    raise FormatError("each coordinate factor needs one value per digit")
        object.__setattr__(self, "action_factors", af)
        object.__setattr__(self, "coord_factors", cf)

    @property
    def rank(self) -> int:
        return len(self.weights)


def opt_tensor(tu: TensorRankUtility, s: Sequence[int], counter: StepCounter | None = None) -> OptSet:
    """Optimal actions at ``s``; ``counter`` receives one tick per multiply-add."""
    counter = counter or StepCounter()
    products = []
    for w, per_r in zip(tu.weights, tu.coord_factors):
        p = w
        for g, digit in zip(per_r, s):
            p = p * g[digit]
        counter.tick(len(s))
        products.append(p)
    scores = []
    for a in range(len(tu.actions)):
        total = 0
        for r, p in enumerate(products):
            total += tu.action_factors[r][a] * p
        counter.tick(len(products))
        scores.append(total)
    return argmax(scores)


def tensor_bound(tu: TensorRankUtility) -> int:
    """Multiply-add budget |A|*R*n + R*n for one call of :func:`opt_tensor` (n >= 1)."""
    n, R = len(tu.domains), tu.rank
    return len(tu.actions) * R * n + R * n


def expand_tensor(tu: TensorRankUtility) -> DecisionProblem:
    def utility(a, s):
        total = 0
        for r in range(tu.rank):
            p = tu.weights[r] * tu.action_factors[r][a]
            for i, digit in enumerate(s):
                p *= tu.coord_factors[r][i][digit]
            total += p
        return total

    return DecisionProblem.from_function(tu.actions, tu.domains, utility)


def check_sufficiency_tensor(tu: TensorRankUtility, coords: Iterable[int]) -> Verdict:
    """Fiber scan using :func:`opt_tensor`; steps are multiply-adds."""
    members = coordset(coords, len(tu.domains))
    states = enumerate_states(tu.domains)
    counter = StepCounter()
    bound = len(states) * tensor_bound(tu)
    first: dict[tuple, tuple] = {}
    for s in states:
        o = opt_tensor(tu, s, counter)
        key = project(s, members)
        if key not in first:
            first[key] = (s, o)
        elif first[key][1] != o:
            return Verdict(False, Pair(first[key][0], s), counter.count, bound, counter.count)
    return Verdict(True, None, counter.count, bound, counter.count)


# --------------------------------------------------------------------------
# Difference vectors: utilities relative to action 0, so a vector of length
# |A| - 1 determines the optimal set.


def _opt_of_diff(d: tuple) -> OptSet:
    return argmax((0,) + d)


def _add(x: tuple, y: tuple) -> tuple:
    return tuple(a + b for a, b in zip(x, y))


def _minkowski(xs: set, ys: set) -> set:
    return {_add(x, y) for x in xs for y in ys}


# --------------------------------------------------------------------------
# Tree structure


@dataclass(frozen=True)
class TreeUtility:
    """``U(a, s) = sum_i u_i(a, s_i, s_parent(i))``.

    ``parent[i]`` is ``None`` for roots, otherwise an index below ``i``.
    Root tables are indexed ``[a][s_i]``, the others ``[a][s_i][s_parent]``.
    """

    actions: tuple[str, ...]
    domains: tuple[int, ...]
    parent: tuple[int | None, ...]
    local: tuple = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "actions", tuple(self.actions))
        object.__setattr__(self, "domains", tuple(self.domains))
        object.__setattr__(self, "parent", tuple(self.parent))
        n = len(self.domains)
        if len(self.parent) != n or len(self.local) != n:
            raise FormatError("one parent entry and one local table per coordinate")
        tables = []
        for i, p in enumerate(self.parent):
            if p is not None and not 0 <= p < i:
                raise FormatError(f"parent of {i} must precede it")
            t = self.local[i]
            if len(t) != len(self.actions):
                raise FormatError(f"local table {i} needs one entry per action")
            if p is None:
                tables.append(tuple(tuple(rational(x) for x in row) for row in t))
                bad = any(len(row) != self.domains[i] for row in t)
            else:
                tables.append(tuple(tuple(tuple(rational(x) for x in cell) for cell in row) for row in t))
                bad = any(len(row) != self.domains[i] or any(len(c) != self.domains[p] for c in row)
                          for row in t)
            if bad:
                raise FormatError(f"local table {i} has the wrong shape")
        object.__setattr__(self, "local", tuple(tables))

    def term(self, i: int, a: int, s: Sequence[int]) -> Rational:
        p = self.parent[i]
        return self.local[i][a][s[i]] if p is None else self.local[i][a][s[i]][s[p]]


def expand_tree(tu: TreeUtility) -> DecisionProblem:
    return DecisionProblem.from_function(
        tu.actions, tu.domains, lambda a, s: sum(tu.term(i, a, s) for i in range(len(s))))


def relevant_tree(tu: TreeUtility) -> tuple[int, ...]:
    """Relevant coordinates of a tree-structured utility without expanding it.

    For coordinate i the tree is re-rooted at i.  Each neighbouring subtree
    contributes the set of achievable (difference vector with s_i = x,
    difference vector with s_i = v) pairs, its own assignment shared by both;
    i is relevant when some combined pair yields two different optimal sets.
    The cost is polynomial in n, the domain sizes and the number of distinct
    partial difference vectors.
    """
    n, A = len(tu.domains), len(tu.actions)
    nbrs: list[list[int]] = [[] for _ in range(n)]
    for c, p in enumerate(tu.parent):
        if p is not None:
            nbrs[c].append(p)
            nbrs[p].append(c)

    def diff(values) -> tuple:
        return tuple(values[a] - values[0] for a in range(1, A))

    def edge(u: int, yu: int, w: int, yw: int) -> tuple:
        """Difference vector of the factor on edge {u, w}."""
        if tu.parent[u] == w:
            return diff([tu.local[u][a][yu][yw] for a in range(A)])
        return diff([tu.local[w][a][yw][yu] for a in range(A)])

    def unary(u: int, y: int) -> tuple:
        if tu.parent[u] is None:
            return diff([tu.local[u][a][y] for a in range(A)])
        return (0,) * (A - 1)

    memo: dict[tuple[int, int | None], dict[int, set]] = {}

    def component(u: int, came_from: int | None) -> dict[int, set]:
        """Achievable vectors of the subtree at u (away from came_from), by s_u."""
        key = (u, came_from)
        if key in memo:
            return memo[key]
        out = {}
        for y in range(tu.domains[u]):
            acc = {unary(u, y)}
            for w in nbrs[u]:
                if w == came_from:
                    continue
                sub = component(w, u)
                reach = {_add(edge(u, y, w, yw), t) for yw, ts in sub.items() for t in ts}
                acc = _minkowski(acc, reach)
            out[y] = acc
        memo[key] = out
        return out

    roots = [i for i in range(n) if tu.parent[i] is None]
    root_of = list(range(n))
    for i in range(n):
        if tu.parent[i] is not None:
            root_of[i] = root_of[tu.parent[i]]

    relevant = []
    for i in range(n):
        others = {(0,) * (A - 1)}
        for r in roots:
            if r != root_of[i]:
                others = _minkowski(others, set().union(*component(r, None).values()))
        found = False
        for x, v in itertools.combinations(range(tu.domains[i]), 2):
            pairs = {(_add(unary(i, x), o), _add(unary(i, v), o)) for o in others}
            for w in nbrs[i]:
                sub = component(w, i)
                reach = {(_add(edge(i, x, w, yw), t), _add(edge(i, v, w, yw), t))
                         for yw, ts in sub.items() for t in ts}
                pairs = {(_add(p, q), _add(p2, q2)) for p, p2 in pairs for q, q2 in reach}
            if any(_opt_of_diff(p) != _opt_of_diff(q) for p, q in pairs):
                found = True
                break
        if found:
            relevant.append(i)
    return tuple(relevant)


# --------------------------------------------------------------------------
# Bounded treewidth


@dataclass(frozen=True)
class PairwiseUtility:
    """Unary plus pairwise terms with a tree decomposition of the interaction graph.

    ``unary[i][a][v]``; ``edges[(i, j)][a][v_i][v_j]`` with ``i < j``;
    ``bags`` is a list of coordinate tuples joined by ``bag_edges`` (a path
    through the bags in order when omitted).
    """

    actions: tuple[str, ...]
    domains: tuple[int, ...]
    unary: tuple = field(repr=False)
    edges: dict = field(repr=False)
    bags: tuple[tuple[int, ...], ...] = ()
    width: int = 0
    bag_edges: tuple[tuple[int, int], ...] | None = None

    def __post_init__(self):
        n = len(self.domains)
        object.__setattr__(self, "actions", tuple(self.actions))
        object.__setattr__(self, "domains", tuple(self.domains))
        unary = tuple(tuple(tuple(rational(x) for x in row) for row in t) for t in self.unary)
        if len(unary) != n or any(len(t) != len(self.actions) or any(len(r) != d for r in t)
                                  for t, d in zip(unary, self.domains)):
            raise FormatError("unary tables must be n x |A| x |X_i|")
        edges = {}
        for (i, j), t in self.edges.items():
            if not 0 <= i < j < n:
                raise FormatError(f"edge {(i, j)} must satisfy i < j < n")
            edges[(i, j)] = tuple(tuple(tuple(rational(x) for x in r) for r in m) for m in t)
        bags = tuple(tuple(sorted(b)) for b in self.bags)
        bag_edges = (tuple((k, k + 1) for k in range(len(bags) - 1)) if self.bag_edges is None
                     else tuple(tuple(e) for e in self.bag_edges))
        object.__setattr__(self, "unary", unary)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "bags", bags)
        object.__setattr__(self, "bag_edges", bag_edges)
        validate_decomposition(n, list(edges), bags, bag_edges, self.width)

    def utility(self, a: int, s: Sequence[int]) -> Rational:
        total = sum(self.unary[i][a][s[i]] for i in range(len(s)))
        return total + sum(t[a][s[i]][s[j]] for (i, j), t in self.edges.items())


def validate_decomposition(n: int, edges, bags, bag_edges, width: int) -> None:
    if n and not bags:
        raise FormatError("a decomposition needs at least one bag")
    covered = set().union(*bags) if bags else set()
    if any(not 0 <= v < n for v in covered):
        raise FormatError("bag mentions a coordinate outside the instance")
    if covered != set(range(n)):
        raise FormatError(f"coordinates {sorted(set(range(n)) - covered)} appear in no bag")
    for i, j in edges:
        if not any(i in b and j in b for b in bags):
            raise FormatError(f"edge {(i, j)} is not contained in any bag")
    if bags and max(len(b) for b in bags) - 1 != width:
        raise FormatError(f"declared width {width} but largest bag has {max(len(b) for b in bags)} members")
    m = len(bags)
    adj: list[list[int]] = [[] for _ in range(m)]
    for x, y in bag_edges:
        if not (0 <= x < m and 0 <= y < m) or x == y:
            raise FormatError(f"bad bag edge {(x, y)}")
        adj[x].append(y)
        adj[y].append(x)
    if m and len(bag_edges) != m - 1 or len(_reach(adj, 0)) != m:
        raise FormatError("bags must be joined into a tree")
    for v in range(n):
        holding = [k for k, b in enumerate(bags) if v in b]
        sub = [[y for y in adj[x] if v in bags[y]] for x in range(m)]
        if len(_reach(sub, holding[0])) != len(holding):
            raise FormatError(f"bags containing coordinate {v} are not connected")


def _reach(adj, start: int) -> set[int]:
    if not adj:
        return set()
    seen, todo = {start}, [start]
    while todo:
        x = todo.pop()
        for y in adj[x]:
            if y not in seen:
                seen.add(y)
                todo.append(y)
    return seen


def expand_pairwise(pu: PairwiseUtility) -> DecisionProblem:
    return DecisionProblem.from_function(pu.actions, pu.domains, pu.utility)


def check_sufficiency_treewidth(pu: PairwiseUtility, coords: Iterable[int],
                                counter: StepCounter | None = None) -> Verdict:
    """Sufficiency by bag-wise dynamic programming over the decomposition.

    ``coords`` is sufficient iff no coordinate outside it is relevant.  For
    each candidate coordinate i and pair of values (x, v), two copies of the
    state that differ only at i are evaluated simultaneously: every bag table
    maps an assignment of its coordinates to the achievable pairs of
    difference vectors.  Steps count bag-assignment evaluations and stay
    within |bags| * k^(w+1) per (i, x, v).
    """
    n, A = len(pu.domains), len(pu.actions)
    members = coordset(coords, n)
    counter = counter or StepCounter()
    start = counter.count
    m = len(pu.bags)
    k = max(pu.domains, default=1)
    checks = sum(comb(pu.domains[i], 2) for i in range(n) if i not in members)
    bound = checks * m * k ** (pu.width + 1)

    def diff(values) -> tuple:
        return tuple(values[a] - values[0] for a in range(1, A))

    # each factor lives in the first bag that holds its scope
    home_unary = {i: next(b for b in range(m) if i in pu.bags[b]) for i in range(n)}
    home_edge = {e: next(b for b in range(m) if e[0] in pu.bags[b] and e[1] in pu.bags[b])
                 for e in pu.edges}
    adj: list[list[int]] = [[] for _ in range(m)]
    for x, y in pu.bag_edges:
        adj[x].append(y)
        adj[y].append(x)
    order, parent = [], {0: None}
    todo = [0]
    while todo:
        b = todo.pop()
        order.append(b)
        for c in adj[b]:
            if c not in parent:
                parent[c] = b
                todo.append(c)

    zero = (0,) * (2 * (A - 1))

    def relevant_via(i: int, x: int, v: int) -> bool:
        messages: dict[int, dict[tuple, set]] = {}
        for b in reversed(order):
            bag = pu.bags[b]
            ranges = [range(pu.domains[j]) if j != i else (x,) for j in bag]
            kids = [c for c in adj[b] if parent.get(c) == b]
            table: dict[tuple, set] = {}
            sep = [p for p, j in enumerate(bag) if parent[b] is not None and j in pu.bags[parent[b]]]
            for assign in itertools.product(*ranges):
                counter.tick()
                s1 = dict(zip(bag, assign))
                s2 = dict(s1)
                if i in s2:
                    s2[i] = v
                local1 = [0] * A
                local2 = [0] * A
                for j in bag:
                    if home_unary[j] == b:
                        for a in range(A):
                            local1[a] += pu.unary[j][a][s1[j]]
                            local2[a] += pu.unary[j][a][s2[j]]
                for (p, q), t in pu.edges.items():
                    if home_edge[(p, q)] == b:
                        for a in range(A):
                            local1[a] += t[a][s1[p]][s1[q]]
                            local2[a] += t[a][s2[p]][s2[q]]
                acc = {diff(local1) + diff(local2)}
                for c in kids:
                    key = tuple(s1[j] for j in pu.bags[c] if j in s1)
                    acc = _minkowski(acc, messages[c].get(key, set()))
                    if not acc:
                        break
                key = tuple(assign[p] for p in sep)
                table.setdefault(key, set()).update(acc)
            messages[b] = table
        half = A - 1
        final = set().union(*messages[0].values()) if messages else {zero}
        return any(_opt_of_diff(p[:half]) != _opt_of_diff(p[half:]) for p in final)

    for i in range(n):
        if i in members:
            continue
        for x, v in itertools.combinations(range(pu.domains[i]), 2):
            if relevant_via(i, x, v):
                steps = counter.count - start
                return Verdict(False, {"coordinate": i, "values": (x, v)}, steps, bound, steps)
    steps = counter.count - start
    return Verdict(True, None, steps, bound, steps)


# --------------------------------------------------------------------------
# Coordinate symmetry


def orbit_types(d: int, k: int) -> list[tuple[int, ...]]:
    """Count vectors (length k, summing to d) in lexicographic order of multisets."""
    out = []
    for multiset in itertools.combinations_with_replacement(range(k), d):
        counts = [0] * k
        for v in multiset:
            counts[v] += 1
        out.append(tuple(counts))
    return out


def orbit_type(s: Sequence[int], k: int) -> tuple[int, ...]:
    counts = [0] * k
    for v in s:
        counts[v] += 1
    return tuple(counts)


def orbit_count(d: int, k: int) -> int:
    return comb(d + k - 1, k - 1)


def verify_symmetry(problem: DecisionProblem) -> None:
    """Check invariance under a transposition and an n-cycle, which generate S_n.

    Invariance under generators is equivalent to invariance under every
    permutation, so the check is exact for any n.
    """
    n = problem.n
    if len(set(problem.domains)) > 1:
        raise SymmetryError("coordinates have different domains", ())
    if n < 2:
        return
    gens = [(1, 0) + tuple(range(2, n)), tuple(range(1, n)) + (0,)]
    for perm in gens:
        for k, s in enumerate(problem.states):
            t = problem.index(tuple(s[perm[i]] for i in range(n)))
            for row in problem.utilities:
                if row[k] != row[t]:
                    raise SymmetryError(f"utility changes under coordinate permutation {perm}", perm)


def check_sufficiency_symmetric(problem: DecisionProblem, coords: Iterable[int],
                                counter: StepCounter | None = None) -> Verdict:
    """Sufficiency for a permutation-invariant utility via orbit types.

    A fiber of ``coords`` is determined, up to orbit type, by the count
    vector of its fixed values; it realizes exactly the types obtained by
    adding any count vector of the free coordinates.  One OptSet per type
    therefore decides every fiber with the same count vector at once.
    """
    verify_symmetry(problem)
    d = problem.n
    k = problem.domains[0] if d else 1
    members = coordset(coords, d)
    rest = [i for i in range(d) if i not in members]
    counter = counter or StepCounter()
    start = counter.count
    bound = 2 * orbit_count(len(members), k) * orbit_count(len(rest), k)
    cache: dict[tuple, OptSet] = {}

    def place(fixed: tuple[int, ...], free: tuple[int, ...]) -> tuple[int, ...]:
        s = [0] * d
        for i, v in zip(members, fixed):
            s[i] = v
        for i, v in zip(rest, free):
            s[i] = v
        return tuple(s)

    def values(counts: tuple[int, ...]) -> tuple[int, ...]:
        return tuple(v for v, c in enumerate(counts) for _ in range(c))

    for fixed_type in orbit_types(len(members), k):
        fixed = values(fixed_type)
        first = None
        for free_type in orbit_types(len(rest), k):
            s = place(fixed, values(free_type))
            typ = orbit_type(s, k)
            counter.tick()
            if typ not in cache:
                cache[typ] = problem.opt_table[problem.index(s)]
            if first is None:
                first = (s, cache[typ])
                continue
            counter.tick()
            if cache[typ] != first[1]:
                steps = counter.count - start
                return Verdict(False, Pair(first[0], s), steps, bound, steps)
    steps = counter.count - start
    return Verdict(True, None, steps, bound, steps)
