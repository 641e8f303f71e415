"""Translations of applied questions into relevance queries.

* configuration simplification: which parameters must be kept so that the
  set of target behaviours exhibited is unchanged;
* one-step POMDP: does acting on coarsened observations keep the
  full-information optimum at every state;
* hyperparameter redundancy: can a hyperparameter be dropped without
  changing any environment's set of maximizing settings.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any

from .core import DecisionProblem, argmax, rational, relevant_coordinates
from .errors import FormatError
from .static import check_sufficiency, find_minimum_sufficient
from .stochastic import StochasticProblem, check_preservation_under, fiber_optimizer_under
from .verdict import Verdict

BASELINE = "none"


def _need(data: dict, key: str, kind: str):
    if key not in data:
        raise FormatError(f"{kind} input is missing {key!r}")
    return data[key]


# --------------------------------------------------------------------------
# Configuration


@dataclass(frozen=True)
class ConfigTranslation:
    problem: DecisionProblem
    parameters: tuple[str, ...]
    values: tuple[tuple[Any, ...], ...]
    target: tuple[str, ...]
    core: tuple[str, ...]
    verdict: Verdict


def config_problem(data: dict) -> tuple[DecisionProblem, tuple[str, ...], tuple[tuple[Any, ...], ...], tuple[str, ...]]:
    """Decision problem whose optimal set at a configuration is its exhibited target behaviours.

    Each target behaviour pays 1 where exhibited and 0 elsewhere; the extra
    action ``none`` pays 1/2, so it is optimal exactly when no target
    behaviour is exhibited.
    """
    kind = "config"
    params = _need(data, "parameters", kind)
    names = tuple(p["name"] for p in params)
    values = tuple(tuple(p["values"]) for p in params)
    behaviours = tuple(_need(data, "behaviours", kind))
    target = tuple(data.get("target", behaviours))
    unknown = set(target) - set(behaviours)
    if unknown:
        raise FormatError(f"target mentions unknown behaviours {sorted(unknown)}")
    if BASELINE in target:
        raise FormatError(f"{BASELINE!r} is reserved for the baseline action")
    exhibits: dict[tuple[int, ...], frozenset] = {}
    for row in _need(data, "rows", kind):
        config = row["config"]
        try:
            key = tuple(values[i].index(config[name]) for i, name in enumerate(names))
        except (KeyError, ValueError) as exc:
            raise FormatError(f"row {config!r} does not match the parameter domains") from exc
        if key in exhibits:
            raise FormatError(f"configuration {config!r} listed twice")
        bad = set(row["behaviours"]) - set(behaviours)
        if bad:
            raise FormatError(f"row {config!r} lists unknown behaviours {sorted(bad)}")
        exhibits[key] = frozenset(row["behaviours"])
    domains = tuple(len(v) for v in values)
    total = 1
    for d in domains:
        total *= d
    if len(exhibits) != total:
        raise FormatError(f"behaviour table covers {len(exhibits)} of {total} configurations")

    def utility(a: int, s: tuple[int, ...]) -> Fraction | int:
        if a == len(target):
            return Fraction(1, 2)
        return int(target[a] in exhibits[s])

    problem = DecisionProblem.from_function(target + (BASELINE,), domains, utility)
    return problem, names, values, target


def translate_config(data: dict) -> ConfigTranslation:
    """Smallest set of parameters that preserves the exhibited target behaviours."""
    problem, names, values, target = config_problem(data)
    verdict = find_minimum_sufficient(problem, problem.n)
    core = tuple(names[i] for i in relevant_coordinates(problem))
    return ConfigTranslation(problem, names, values, target, core, verdict)


# --------------------------------------------------------------------------
# One-step POMDP


@dataclass(frozen=True)
class PomdpTranslation:
    stochastic: StochasticProblem
    states: tuple[str, ...]
    labels: tuple[Any, ...]
    coarse_optimizer: dict[Any, tuple[str, ...]]
    full_optimizer: dict[str, tuple[str, ...]]
    verdict: Verdict


def translate_pomdp(data: dict) -> PomdpTranslation:
    """Preservation query for the composite labelling coarsening . observation."""
    kind = "pomdp"
    states = tuple(_need(data, "states", kind))
    actions = tuple(_need(data, "actions", kind))
    prior = _need(data, "prior", kind)
    observe = _need(data, "observation", kind)
    reward = _need(data, "reward", kind)
    coarsen = data.get("coarsening")
    try:
        dist = tuple(rational(prior[s]) for s in states)
        rows = tuple(tuple(rational(reward[a][s]) for s in states) for a in actions)
        obs = tuple(observe[s] for s in states)
        labels = obs if coarsen is None else tuple(coarsen[o] for o in obs)
    except KeyError as exc:
        raise FormatError(f"pomdp table has no entry for {exc}") from exc
    base = DecisionProblem(actions, (len(states),), rows)
    sp = StochasticProblem(base, dist)
    verdict = check_preservation_under(sp, labels)
    fo = fiber_optimizer_under(sp, labels)
    coarse = {lab: tuple(actions[a] for a in entry.optset) for lab, entry in fo.entries.items()}
    full = {s: tuple(actions[a] for a in base.opt_table[k]) for k, s in enumerate(states)}
    return PomdpTranslation(sp, states, labels, coarse, full, verdict)


# --------------------------------------------------------------------------
# Hyperparameters


@dataclass(frozen=True)
class HyperparamTranslation:
    problem: DecisionProblem
    maximizers: dict[str, tuple[tuple[int, int, int], ...]]
    verdict: Verdict
    projection_sufficient: bool


def translate_hyperparam(data: dict) -> HyperparamTranslation:
    """Is gamma redundant: is every environment's maximizer set closed under changing gamma?

    The decision problem has environments as actions and settings
    (alpha, gamma, epsilon) as states.  Gamma is redundant when, for each
    environment, a setting is a maximizer exactly when some maximizer shares
    its alpha and epsilon.  The witness on NO names the environment and a
    setting that violates this.
    """
    kind = "hyperparam"
    envs = tuple(_need(data, "environments", kind))
    axes = [tuple(_need(data, key, kind)) for key in ("alpha", "gamma", "epsilon")]
    returns = _need(data, "returns", kind)
    domains = tuple(len(ax) for ax in axes)

    def utility(e: int, h: tuple[int, int, int]) -> Any:
        try:
            return returns[envs[e]][h[0]][h[1]][h[2]]
        except (KeyError, IndexError) as exc:
            raise FormatError(f"returns table has no entry for {envs[e]} at {h}") from exc

    problem = DecisionProblem.from_function(envs, domains, utility)
    maximizers = {}
    steps = 0
    witness = None
    for e, env in enumerate(envs):
        best = argmax(problem.utilities[e])
        opt_states = [problem.states[k] for k in best]
        maximizers[env] = tuple(opt_states)
        kept = {(h[0], h[2]) for h in opt_states}
        for k, h in enumerate(problem.states):
            steps += 1
            if ((h[0], h[2]) in kept) != (k in best) and witness is None:
                witness = (env, h)
    verdict = Verdict(witness is None, witness, steps, len(envs) * problem.num_states, steps)
    return HyperparamTranslation(problem, maximizers, verdict, check_sufficiency(problem, (0, 2)).answer)


TRANSLATORS = {"config": translate_config, "pomdp": translate_pomdp, "hyperparam": translate_hyperparam}


def load_translation_input(path: str | Path) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise FormatError("translation input must be a JSON object")
    return data
