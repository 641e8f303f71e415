"""DIMACS CNF and QDIMACS reading and writing."""
from __future__ import annotations

from .circuit import CNF, QBF
from .errors import FormatError, ParseError


def _tokens(text: str):
    """Yield (line number, stripped line) skipping comments and blanks."""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("%"):
            return
        yield lineno, line


def _header(lineno: int, line: str, kind: str) -> tuple[int, int]:
    parts = line.split()
    if len(parts) != 4 or parts[0] != "p" or parts[1] != kind:
        raise ParseError(f"expected 'p {kind} <vars> <clauses>', got {line!r}", lineno)
    try:
        nv, nc = int(parts[2]), int(parts[3])
    except ValueError:
        raise ParseError(f"non-integer counts in header {line!r}", lineno) from None
    if nv < 0 or nc < 0:
        raise ParseError("negative counts in header", lineno)
    return nv, nc


def _ints(lineno: int, line: str) -> list[int]:
    try:
        return [int(tok) for tok in line.split()]
    except ValueError:
        raise ParseError(f"non-integer token in {line!r}", lineno) from None


def _read(text: str, quantifiers: bool):
    lines = iter(_tokens(text))
    first = next(lines, None)
    if first is None:
        raise ParseError("missing problem line", None)
    nv, nc = _header(*first, "cnf")
    prefix: list[tuple[str, int]] = []
    quantified: set[int] = set()
    clauses: list[tuple[int, ...]] = []
    current: list[int] = []
    last = first[0]
    for lineno, line in lines:
        last = lineno
        head = line.split()[0]
        if head in ("e", "a"):
            if quantifiers and not clauses and not current:
                values = _ints(lineno, line[1:])
                if not values or values[-1] != 0 or 0 in values[:-1]:
                    raise ParseError("quantifier line must end with a single 0", lineno)
                for v in values[:-1]:
                    if not 1 <= v <= nv:
                        raise ParseError(f"variable {v} outside 1..{nv}", lineno)
                    if v in quantified:
                        raise ParseError(f"variable {v} quantified twice", lineno)
                    quantified.add(v)
                    prefix.append((head, v))
                continue
            raise ParseError(f"unexpected quantifier line {line!r}", lineno)
        if head == "p":
            raise ParseError("duplicate problem line", lineno)
        for lit in _ints(lineno, line):
            if lit == 0:
                clauses.append(tuple(current))
                current = []
            elif abs(lit) > nv:
                raise ParseError(f"literal {lit} exceeds declared {nv} variables", lineno)
            else:
                current.append(lit)
    if current:
        raise ParseError("last clause is not terminated by 0", last)
    if len(clauses) != nc:
        raise ParseError(f"header declares {nc} clauses, found {len(clauses)}", last)
    return nv, clauses, prefix


def parse_dimacs(text: str) -> CNF:
    nv, clauses, _ = _read(text, False)
    return CNF(nv, tuple(clauses))


def parse_qdimacs(text: str) -> QBF:
    """Free matrix variables are bound existentially outside the prefix."""
    nv, clauses, prefix = _read(text, True)
    matrix = CNF(nv, tuple(clauses))
    bound = {v for _, v in prefix}
    free = sorted({abs(l) for c in clauses for l in c} - bound)
    try:
        return QBF(tuple(("e", v) for v in free) + tuple(prefix), matrix)
    except FormatError as exc:
        raise ParseError(str(exc), None) from exc


def to_dimacs(f: CNF) -> str:
    lines = [f"p cnf {f.num_vars} {len(f.clauses)}"]
    lines += [" ".join(str(l) for l in c + (0,)) for c in f.clauses]
    return "\n".join(lines) + "\n"


def to_qdimacs(q: QBF) -> str:
    if not isinstance(q.matrix, CNF):
        raise FormatError("QDIMACS needs a CNF matrix")
    lines = [f"p cnf {q.matrix.num_vars} {len(q.matrix.clauses)}"]
    for quant, vs in q.blocks():
        lines.append(" ".join([quant] + [str(v) for v in vs] + ["0"]))
    lines += [" ".join(str(l) for l in c + (0,)) for c in q.matrix.clauses]
    return "\n".join(lines) + "\n"
