"""Capacity budgets for explicit enumeration.

Defaults can be overridden through ``RELEVANCE_KIT_BUDGET``.  A bare integer
replaces the expansion budget; a comma separated ``key=value`` list sets
individual budgets, e.g. ``expand=4096,lattice=12``.
"""
from __future__ import annotations

import os

from .errors import CapacityError, FormatError

ENV_VAR = "RELEVANCE_KIT_BUDGET"

DEFAULTS = {
    "expand": 1 << 20,   # table entries |A| * 2^n produced by expansion
    "formula": 20,       # variables for the exhaustive tautology oracle
    "qbf": 16,           # variables for the game-tree QBF oracle
    "lattice": 20,       # coordinates for a subset-lattice scan
}


def budget(name: str) -> int:
    raw = os.environ.get(ENV_VAR, "").strip()
    if not raw:
        return DEFAULTS[name]
    if raw.isdigit():
        return int(raw) if name == "expand" else DEFAULTS[name]
    values = dict(DEFAULTS)
    for item in raw.split(","):
        key, sep, value = item.partition("=")
        key = key.strip()
        if not sep or key not in DEFAULTS or not value.strip().isdigit():
            raise FormatError(f"bad {ENV_VAR} entry {item!r}")
        values[key] = int(value)
    return values[name]


def require(name: str, needed: int, what: str) -> None:
    limit = budget(name)
    if needed > limit:
        raise CapacityError(what, needed, limit)
