"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line."""
import itertools
import random
import time
from fractions import Fraction
from math import comb

import pytest

from conftest import FIXTURES, subsets
from relevance_kit.bench import bench_suite, budget_sweep, random_distribution, regime_rows, sweep_violations
from relevance_kit.certify import (QUERIES, BudgetedCertifier, FoolingPair, adversary_game, budgeted_certify,
                                   threshold_decider, transcript)
from relevance_kit.circuit import CNF, QBF, TruthTable, count_models, is_tautology_oracle
from relevance_kit.core import (DecisionProblem, is_sufficient_oracle, minimum_sufficient_set, project,
                                relevant_coordinates)
from relevance_kit.errors import OutOfGapError
from relevance_kit.io import load
from relevance_kit.reductions import (gadget_3sat_chain, gadget_exists_forall, gadget_majsat, gadget_setcover,
                                      gadget_shifted, gadget_tautology, gadget_tqbf, verify_gadget)
from relevance_kit.sequential import check_seq_anchor, check_seq_sufficiency, find_seq_minimum
from relevance_kit.static import check_anchor, check_sufficiency, find_minimum_sufficient
from relevance_kit.stochastic import (StochasticProblem, check_decisiveness, check_preservation,
                                      check_stoch_anchor, check_stoch_anchor_preservation, fiber_optimizer,
                                      find_stoch_minimum, uniform)
from relevance_kit.tractable import (PairwiseUtility, TensorRankUtility, TreeUtility, check_sufficiency_symmetric,
                                     check_sufficiency_tensor, check_sufficiency_treewidth, expand_pairwise,
                                     expand_tensor, expand_tree, opt_tensor, orbit_count, orbit_type, orbit_types,
                                     relevant_tree, tensor_bound)
from relevance_kit.translate import load_translation_input, translate_config, translate_pomdp
from relevance_kit.verdict import StepCounter

pytestmark = pytest.mark.acceptance


@pytest.fixture
def report(capsys):
    def emit(number: int, title: str, failures: list, detail: str = ""):
        status = "PASS" if not failures else "FAIL"
        line = f"[{status}] criterion {number}: {title}"
        if detail:
            line += f" ({detail})"
        if failures:
            line += f"; first failure: {failures[0]}"
        with capsys.disabled():
            print("\n" + line)
        assert not failures, line
    return emit


def lattice_optimum(p):
    return find_minimum_sufficient(p, p.n, "lattice").witness


# 1 ------------------------------------------------------------------------


def test_collapse_suite(report):
    start = time.perf_counter()
    failures = []
    rng = random.Random(20240601)
    for trial in range(2000):
        n = rng.randint(0, 4)
        domains = tuple(rng.randint(2, 3) for _ in range(n))
        size = 1
        for d in domains:
            size *= d
        A = rng.randint(1, 3)
        rows = [[rng.randint(0, 2) for _ in range(size)] for _ in range(A)]
        p = DecisionProblem(tuple(f"a{j}" for j in range(A)), domains, rows)
        m, r, lat = minimum_sufficient_set(p), relevant_coordinates(p), lattice_optimum(p)
        if not m == r == tuple(lat):
            failures.append(("random", trial, m, r, lat))
    exhaustive = 0
    for n in range(4):
        S = 2 ** n
        for bits in range(1 << (2 * S)):
            rows = [[(bits >> k) & 1 for k in range(S)], [(bits >> (S + k)) & 1 for k in range(S)]]
            p = DecisionProblem(("a", "b"), (2,) * n, rows)
            m, r, lat = minimum_sufficient_set(p), relevant_coordinates(p), lattice_optimum(p)
            exhaustive += 1
            if not m == r == tuple(lat):
                failures.append(("boolean", n, bits))
    elapsed = time.perf_counter() - start
    if elapsed >= 60:
        failures.append(f"took {elapsed:.1f}s")
    report(1, "collapse: minimum == relevant == lattice optimum", failures,
           f"2000 random + {exhaustive} Boolean instances in {elapsed:.1f}s")


# 2 ------------------------------------------------------------------------


def tqbf_sources():
    for p in range(4):
        m = min(p, 2)
        for order in itertools.permutations(range(1, p + 1)):
            for quants in itertools.product("ea", repeat=p):
                for bits in range(1 << (1 << m)):
                    yield QBF(tuple(zip(quants, order)), TruthTable(m, bits))


def exists_forall_sources():
    for ne in range(3):
        for na in range(3):
            nv = ne + na
            prefix = tuple(("e", v) for v in range(1, ne + 1)) + tuple(("a", v) for v in range(ne + 1, nv + 1))
            for bits in range(1 << (1 << nv)):
                yield QBF(prefix, TruthTable(nv, bits))


def setcover_sources():
    for u in range(1, 4):
        pool = [tuple(s) for size in range(u + 1) for s in itertools.combinations(range(1, u + 1), size)]
        for count in range(4):
            for family in itertools.combinations_with_replacement(pool, count):
                yield u, family


def test_gadget_equivalences(report):
    failures = []
    counts = {}

    def check(kind, gadget, extra=True):
        counts[kind] = counts.get(kind, 0) + 1
        r = verify_gadget(gadget)
        if not (r.passed and extra):
            failures.append((kind, gadget.source, r))

    for bits in range(256):
        check("tautology", gadget_tautology(TruthTable(3, bits)))
    for q in exists_forall_sources():
        check("exists-forall", gadget_exists_forall(q))
    for n in range(1, 4):
        for bits in range(1 << (1 << n)):
            f = TruthTable(n, bits)
            g = gadget_majsat(f)
            decisive = check_decisiveness(g.explicit(), ()).answer
            check("majsat", g, decisive == (count_models(f) >= Fraction(2 ** n, 2)))
            expected = 1 if is_tautology_oracle(f) else n + 1
            g = gadget_shifted(f)
            check("shifted", g, len(minimum_sufficient_set(g.explicit())) == expected)
    for q in tqbf_sources():
        check("tqbf", gadget_tqbf(q))
    for u, family in setcover_sources():
        check("setcover", gadget_setcover(u, family))
    detail = ", ".join(f"{k} {v}" for k, v in counts.items())
    report(2, "gadget equivalences at oracle scale", failures, detail)


# 3 ------------------------------------------------------------------------


def test_worked_numbers(report):
    failures = []
    sp = load(FIXTURES / "stoch_example.json")
    entry = fiber_optimizer(sp, ()).entries[()]
    if entry.expected != (1, 2):
        failures.append(("expectations", entry.expected))
    if entry.optset != (1,):
        failures.append(("fiber optset", entry.optset))
    if check_preservation(sp, ()).answer is not False:
        failures.append("preservation should fail")
    if check_decisiveness(sp, ()).answer is not True:
        failures.append("decisiveness should hold")
    pomdp = translate_pomdp(load_translation_input(FIXTURES / "pomdp_worked.json"))
    if list(pomdp.coarse_optimizer.values()) != [("b",)] or pomdp.full_optimizer["s1"] != ("a",):
        failures.append(("pomdp", pomdp.coarse_optimizer, pomdp.full_optimizer))
    config = translate_config(load_translation_input(FIXTURES / "config_toy.json"))
    if config.core != ("p2", "p3"):
        failures.append(("config core", config.core))
    report(3, "worked numbers reproduce exactly", failures,
           "E[U(a)]=1, E[U(b)]=2, Opt={b}; POMDP coarse {b}, Opt(s1)={a}; config core {p2,p3}")


# 4 ------------------------------------------------------------------------

# Declared constants for the step-bound check.
ANCHOR_C = 1          # static anchor: one OptSet lookup per state
FIBER_C = 2           # fiber-grouped sufficiency: 2 * |A| per state
STOCH_C = 3           # preservation and anchor-preservation scans
DECISIVE_C = 2        # decisiveness scan
STOCH_ANCHOR_C = 2    # stochastic anchor, times |A|


def bench_corpus():
    for seed in range(4):
        for actions in (2, 3):
            yield from bench_suite(seed=seed, n=3, count=15, num_actions=actions)


def test_step_bounds(report):
    failures = []
    runs = 0

    def within(name, v, limit):
        nonlocal runs
        runs += 1
        if not (v.steps <= v.bound <= limit):
            failures.append((name, v.steps, v.bound, limit))

    for inst in bench_corpus():
        p, sp, sq = inst.problem, inst.stochastic, inst.sequential
        S, A, n = p.num_states, len(p.actions), p.n
        for I in subsets(n):
            within("pairwise", check_sufficiency(p, I, "pairwise"), S * S * A * A)
            within("fiber", check_sufficiency(p, I, "fiber"), FIBER_C * S * A)
            within("anchor", check_anchor(p, I), ANCHOR_C * S)
            within("preservation", check_preservation(sp, I), STOCH_C * S)
            within("decisiveness", check_decisiveness(sp, I), DECISIVE_C * S)
            within("stoch-anchor", check_stoch_anchor(sp, I), STOCH_ANCHOR_C * A * S)
            within("anchor-preservation", check_stoch_anchor_preservation(sp, I), STOCH_C * S)
            within("seq-pairwise", check_seq_sufficiency(sq, I, "pairwise"), S * S)
            within("seq-anchor", check_seq_anchor(sq, I), ANCHOR_C * S)
        for k in range(n + 1):
            within("lattice", find_minimum_sufficient(p, k, "lattice", exhaustive=True), 2 ** n)
            within("stoch-lattice", find_stoch_minimum(sp, k, "decisiveness", exhaustive=True), 2 ** n)
            within("seq-lattice", find_seq_minimum(sq, k, exhaustive=True), 2 ** n)
    rows = regime_rows(bench_corpus())
    failures += [("bench row", r) for r in rows if r["margin"] < 0]
    report(4, "counted steps within declared bounds", failures,
           f"{runs} counted runs + {len(rows)} bench rows, 0 violations allowed")


# 5 ------------------------------------------------------------------------


def test_bridges(report):
    failures = []
    rng = random.Random(77)
    checked = 0
    for trial in range(400):
        n = rng.randint(0, 3)
        domains = tuple(rng.randint(1, 3) for _ in range(n))
        size = 1
        for d in domains:
            size *= d
        A = rng.randint(1, 3)
        p = DecisionProblem(tuple(f"a{j}" for j in range(A)), domains,
                            [[rng.randint(0, 2) for _ in range(size)] for _ in range(A)])
        full = StochasticProblem(p, random_distribution(rng, size, full_support=True))
        sparse = StochasticProblem(p, random_distribution(rng, size, full_support=False))
        relevant = set(relevant_coordinates(p))
        for I in subsets(n):
            checked += 1
            static = is_sufficient_oracle(p, I).answer
            if check_preservation(full, I).answer != static:
                failures.append(("full-support equivalence", trial, I))
            for sp in (full, sparse):
                if check_preservation(sp, I, strict=True).answer and not relevant <= set(I):
                    failures.append(("relevance containment", trial, I))
            mass = {}
            for k, s in enumerate(p.states):
                mass[project(s, I)] = mass.get(project(s, I), 0) + sparse.dist[k]
            if static and all(m > 0 for m in mass.values()) and not check_preservation(sparse, I, strict=True).answer:
                failures.append(("positive-support bridge", trial, I))
    split = load(FIXTURES / "static_not_stochastic.json")
    if not (check_sufficiency(split.base, (0,)).answer and not check_preservation(split, (0,), strict=True).answer):
        failures.append("static-but-not-stochastic fixture")
    seq = load(FIXTURES / "stochastic_not_sequential.json")
    if not (check_preservation(uniform(seq.base), ()).answer and not check_seq_sufficiency(seq, ()).answer):
        failures.append("stochastic-but-not-sequential fixture")
    report(5, "bridge theorems and split fixtures", failures, f"{checked} (instance, set) pairs")


# 6 ------------------------------------------------------------------------


def test_adversary_lower_bound(report):
    start = time.perf_counter()
    failures = []
    games = 0
    for n in (2, 3):
        slots = range(2 ** (n - 1))
        for size in range(2 ** (n - 1)):
            for inspected in itertools.combinations(slots, size):
                games += 1
                pair = adversary_game(n, inspected)
                if not isinstance(pair, FoolingPair):
                    failures.append((n, inspected, "no pair"))
                    continue
                same = transcript(pair.yes, inspected) == transcript(pair.no, inspected)
                opposite = is_sufficient_oracle(pair.yes, ()).answer != is_sufficient_oracle(pair.no, ()).answer
                if not (same and opposite):
                    failures.append((n, inspected, same, opposite))
    elapsed = time.perf_counter() - start
    if elapsed >= 10:
        failures.append(f"took {elapsed:.1f}s")
    report(6, "slot-inspection adversary", failures, f"{games} inspected sets at n=2,3 in {elapsed:.2f}s")


# 7 ------------------------------------------------------------------------


def test_eth_chain_accounting(report):
    failures = []
    rng = random.Random(1234)
    worst = 0.0
    for trial in range(100):
        n = rng.randint(3, 12)
        m = rng.randint(1, 50)
        f = CNF(n, tuple(tuple(rng.choice((1, -1)) * v for v in rng.sample(range(1, n + 1), 3)) for _ in range(m)))
        g = gadget_3sat_chain(f)
        acc = g.accounting
        worst = max(worst, acc["m_out"] / acc["m_in"])
        if acc["m_out"] > 3 * acc["m_in"] or acc["coordinates"] != n + 1:
            failures.append((trial, acc))
        if n <= 8 and not verify_gadget(g).passed:
            failures.append((trial, "equivalence"))
    report(7, "ETH chain accounting", failures, f"100 random 3-CNFs, worst m_out/m_in = {worst:.3f}")


# 8 ------------------------------------------------------------------------


def test_fast_paths(report):
    failures = []
    rng = random.Random(88)
    rv = lambda: rng.randint(-2, 2)
    counts = dict.fromkeys(("tensor", "tree", "treewidth", "symmetric"), 0)
    for _ in range(150):
        n, A, R = rng.randint(1, 4), rng.randint(1, 3), rng.randint(1, 3)
        domains = tuple(rng.randint(1, 4) for _ in range(n))
        tu = TensorRankUtility(tuple(f"a{a}" for a in range(A)), domains, [rv() for _ in range(R)],
                               [[rv() for _ in range(A)] for _ in range(R)],
                               [[[rv() for _ in range(d)] for d in domains] for _ in range(R)])
        p = expand_tensor(tu)
        counts["tensor"] += 1
        for s in p.states:
            counter = StepCounter()
            if opt_tensor(tu, s, counter) != p.opt_table[p.index(s)] or counter.count > A * R * n + R * n:
                failures.append(("tensor opt", s))
        if tensor_bound(tu) != A * R * n + R * n:
            failures.append("tensor bound formula")
        for I in subsets(n):
            if check_sufficiency_tensor(tu, I).answer != is_sufficient_oracle(p, I).answer:
                failures.append(("tensor", I))
    for _ in range(300):
        n, A = rng.randint(1, 6), rng.randint(1, 3)
        domains = tuple(rng.randint(1, 3) for _ in range(n))
        parent = tuple(None if i == 0 or rng.random() < 0.25 else rng.randrange(i) for i in range(n))
        local = [[[rv() for _ in range(domains[i])] for _ in range(A)] if q is None else
                 [[[rv() for _ in range(domains[q])] for _ in range(domains[i])] for _ in range(A)]
                 for i, q in enumerate(parent)]
        tu = TreeUtility(tuple(f"a{a}" for a in range(A)), domains, parent, local)
        counts["tree"] += 1
        if relevant_tree(tu) != relevant_coordinates(expand_tree(tu)):
            failures.append(("tree", parent))
    for _ in range(150):
        n, A = rng.randint(1, 5), rng.randint(1, 3)
        domains = tuple(rng.randint(1, 3) for _ in range(n))
        unary = [[[rv() for _ in range(domains[i])] for _ in range(A)] for i in range(n)]
        star = n > 2 and rng.random() < 0.5
        pairs = [(0, j) for j in range(1, n)] if star else [(i, i + 1) for i in range(n - 1)]
        edges = {e: [[[rv() for _ in range(domains[e[1]])] for _ in range(domains[e[0]])] for _ in range(A)]
                 for e in pairs if rng.random() < 0.8}
        bags = list(pairs) or [(0,)]
        bag_edges = [(0, j) for j in range(1, len(bags))] if star else None
        pu = PairwiseUtility(tuple(f"a{a}" for a in range(A)), domains, unary, edges, bags,
                             1 if n > 1 else 0, bag_edges)
        p = expand_pairwise(pu)
        counts["treewidth"] += 1
        for I in subsets(n):
            v = check_sufficiency_treewidth(pu, I)
            if v.answer != is_sufficient_oracle(p, I).answer or v.steps > v.bound:
                failures.append(("treewidth", I))
    for _ in range(150):
        d, k, A = rng.randint(1, 5), rng.randint(2, 4), rng.randint(1, 3)
        if k ** d > 4096:
            continue
        table = {t: [rv() for _ in range(A)] for t in orbit_types(d, k)}
        p = DecisionProblem.from_function(tuple(f"a{a}" for a in range(A)), (k,) * d,
                                          lambda a, s: table[orbit_type(s, k)][a])
        counts["symmetric"] += 1
        for I in subsets(d):
            v = check_sufficiency_symmetric(p, I)
            if v.answer != is_sufficient_oracle(p, I).answer or v.steps > v.bound:
                failures.append(("symmetric", d, k, I))
    for name, expand, check in (
            ("tensor.json", expand_tensor, lambda u, I: check_sufficiency_tensor(u, I).answer),
            ("pairwise_star.json", expand_pairwise, lambda u, I: check_sufficiency_treewidth(u, I).answer)):
        u = load(FIXTURES / name)
        p = expand(u)
        failures += [(name, I) for I in subsets(p.n) if check(u, I) != is_sufficient_oracle(p, I).answer]
    tree = load(FIXTURES / "tree.json")
    if relevant_tree(tree) != relevant_coordinates(expand_tree(tree)):
        failures.append("tree.json")
    for d in range(9):
        for k in range(1, 6):
            if len(orbit_types(d, k)) != comb(d + k - 1, k - 1) or orbit_count(d, k) != comb(d + k - 1, k - 1):
                failures.append(("orbit count", d, k))
    report(8, "fast paths equal the expansion oracle", failures,
           ", ".join(f"{k} {v}" for k, v in counts.items()) + "; orbit counts d<=8, k<=5")


# 9 ------------------------------------------------------------------------


def test_threshold_decider(report):
    failures = []
    decisions = 0
    for n in range(1, 4):
        for bits in range(1 << (1 << n)):
            f = TruthTable(n, bits)
            truth = is_tautology_oracle(f)
            for rho in range(1, n + 1):
                decisions += 1
                if threshold_decider(rho)(f) != truth:
                    failures.append((n, bits, rho))
            try:
                threshold_decider(n + 1)(f)
                failures.append(("accepted out-of-gap", n, bits))
            except OutOfGapError:
                pass
    for rho in (0, Fraction(1, 2)):
        try:
            threshold_decider(rho)
            failures.append(("accepted rho", rho))
        except OutOfGapError:
            pass
    report(9, "threshold decider matches tautology oracle", failures, f"{decisions} in-gap decisions")


# 10 -----------------------------------------------------------------------


def test_budgeted_certifier(report):
    failures = []
    suite = bench_suite(seed=10, n=3, count=25)
    budgets = [0, 4, 16, 64, 256, 1024, 4096, 1 << 20]
    rows = budget_sweep(suite, budgets)
    failures += sweep_violations(rows)
    verdicts = 0
    for inst in suite:
        for query in QUERIES:
            regime = ("sequential" if query.startswith("seq-") else
                      "stochastic" if query.startswith("stoch-") else "static")
            instance = inst.regime_instance(regime)
            params = {"coords": (0,) if inst.problem.n else (), "k": 1}
            previous_abstained = True
            for b in budgets:
                out = budgeted_certify(BudgetedCertifier(query, b, params), instance)
                if out.work > b:
                    failures.append(("over budget", inst.name, query, b))
                if out.kind == "VERDICT":
                    verdicts += 1
                    if not out.verified:
                        failures.append(("overclaim", inst.name, query, b))
                elif not previous_abstained:
                    failures.append(("abstention after answering", inst.name, query, b))
                previous_abstained = out.kind == "ABSTAIN"
    lazy = [budgeted_certify(BudgetedCertifier("sufficiency", None, always_abstain=True), inst.problem)
            for inst in suite]
    if any(o.kind != "ABSTAIN" for o in lazy):
        failures.append("always-abstain emitted a verdict")
    competent = [budgeted_certify(BudgetedCertifier("sufficiency", None), inst.problem) for inst in suite]
    if not all(o.kind == "VERDICT" and o.verified for o in competent):
        failures.append("unbounded certifier failed to answer")
    # always-abstain keeps integrity (no verdicts to be wrong) but answers nothing
    report(10, "budgeted certifier integrity, monotonicity, always-abstain", failures,
           f"{verdicts} verified verdicts, always-abstain answered 0 of {len(suite)}")
