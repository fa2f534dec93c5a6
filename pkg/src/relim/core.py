"""Core representation of LCL problems in the black-white formalism.

A problem is a label alphabet plus two constraints: the white constraint
(arity = white degree) and the black constraint (arity = black degree).
Constraints are stored as *condensed configurations*: multisets of label
disjunctions with picking semantics (choose one label per group, up to
permutation).  All values are immutable and canonically sorted, so equality
and hashing are structural.
"""

from __future__ import annotations

import re as _re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional

MAX_ARITY = 16
DEFAULT_EXPANSION_CAP = 10**6

# A group is one disjunction of a condensed configuration.
Group = frozenset
Condensed = tuple  # tuple[Group, ...]
Config = tuple  # tuple[str, ...]

_TOKEN_RE = _re.compile(r"[A-Za-z][A-Za-z0-9]*(_[0-9]+)?\Z")
_COLOR_RE = _re.compile(r"_([0-9]+)\Z")


class ParseError(ValueError):
    def __init__(self, msg: str, line: int, col: int = 0):
        super().__init__(f"line {line}, col {col}: {msg}")
        self.line = line
        self.col = col


class ExpansionCapError(RuntimeError):
    """Raised when expanding a condensed constraint would exceed the cap."""


class ArityError(ValueError):
    pass


def color_of(name: str) -> Optional[int]:
    """Color parsed from a trailing ``_j`` suffix, or None."""
    m = _COLOR_RE.search(name)
    if m is None:
        return None
    c = int(m.group(1))
    if c < 1:
        raise ValueError(f"label {name!r}: color suffix must be >= 1")
    return c


def label_key(name: str):
    # sort primarily by color so per-color structure reads off directly
    return (color_of(name) or 0, name)


def canon_group(labels: Iterable[str]) -> Group:
    g = frozenset(labels)
    if not g:
        raise ValueError("empty disjunction")
    return g


def group_key(g: Group):
    return tuple(sorted((label_key(x) for x in g)))


def canon_condensed(groups: Iterable[Iterable[str]]) -> Condensed:
    return tuple(sorted((canon_group(g) for g in groups), key=group_key))


def canon_config(labels: Iterable[str]) -> Config:
    return tuple(sorted(labels, key=label_key))


@dataclass(frozen=True)
class Constraint:
    """A set of condensed configurations sharing one arity."""

    arity: int
    configs: tuple  # tuple[Condensed, ...]

    @staticmethod
    def make(configs: Iterable[Iterable[Iterable[str]]], arity: Optional[int] = None) -> "Constraint":
        canon = sorted({canon_condensed(c) for c in configs}, key=_condensed_key)
        if arity is None:
            if not canon:
                raise ValueError("cannot infer arity of an empty constraint")
            arity = len(canon[0])
        for c in canon:
            if len(c) != arity:
                raise ArityError(f"configuration arity {len(c)} != {arity}")
        if arity > MAX_ARITY:
            raise ArityError(f"arity {arity} exceeds supported maximum {MAX_ARITY}")
        return Constraint(arity, tuple(canon))

    def labels(self) -> frozenset:
        return frozenset(x for c in self.configs for g in c for x in g)

    def __iter__(self):
        return iter(self.configs)

    def __len__(self):
        return len(self.configs)


def _condensed_key(c: Condensed):
    return tuple(group_key(g) for g in c)


@dataclass(frozen=True)
class Problem:
    """An LCL problem: alphabet, white constraint, black constraint.

    ``sets`` optionally maps each label name to the subset of some source
    alphabet it denotes (populated by the round-elimination operators, whose
    output labels are sets of source labels).
    """

    name: str
    white: Constraint
    black: Constraint
    sets: Optional[Mapping] = field(default=None, compare=False)

    def __post_init__(self):
        for lab in self.alphabet:
            if not _TOKEN_RE.match(lab):
                raise ValueError(f"bad label token {lab!r}")

    @property
    def alphabet(self) -> tuple:
        return tuple(sorted(self.white.labels() | self.black.labels(), key=label_key))

    def with_name(self, name: str) -> "Problem":
        return Problem(name, self.white, self.black, self.sets)


# ---------------------------------------------------------------------------
# Matching primitives


def _bijection_exists(needs: list) -> bool:
    """True iff the slots 0..n-1 can be matched bijectively.

    ``needs[i]`` is the list of slot indices item i may occupy.  Backtracking
    over items ordered by fewest options, with a bitmask of used slots and a
    failure memo; n <= MAX_ARITY keeps the mask a small int.
    """
    n = len(needs)
    order = sorted(range(n), key=lambda i: len(needs[i]))
    masks = [0] * n
    for i, opts in enumerate(needs):
        for j in opts:
            masks[i] |= 1 << j
    dead = set()

    def go(idx: int, used: int) -> bool:
        if idx == n:
            return True
        key = (idx, used)
        if key in dead:
            return False
        i = order[idx]
        free = masks[i] & ~used
        while free:
            bit = free & -free
            free ^= bit
            if go(idx + 1, used | bit):
                return True
        dead.add(key)
        return False

    return go(0, 0)


def pick_check(c: Condensed, q: Config) -> bool:
    """Can configuration ``q`` be picked from condensed configuration ``c``?"""
    if len(c) != len(q):
        raise ArityError(f"arity mismatch: {len(c)} vs {len(q)}")
    needs = []
    for lab in q:
        opts = [j for j, g in enumerate(c) if lab in g]
        if not opts:
            return False
        needs.append(opts)
    return _bijection_exists(needs)


def constraint_contains(k: Constraint, q) -> bool:
    """Membership of a configuration in a constraint (via picking)."""
    q = canon_config(q)
    if len(q) != k.arity:
        raise ArityError(f"arity mismatch: {len(q)} vs {k.arity}")
    return any(pick_check(c, q) for c in k.configs)


def dominates_config(c1: Condensed, c2: Condensed) -> bool:
    """True iff each group of ``c2`` maps bijectively into a superset group of ``c1``."""
    if len(c1) != len(c2):
        raise ArityError(f"arity mismatch: {len(c1)} vs {len(c2)}")
    needs = []
    for g in c2:
        opts = [j for j, h in enumerate(c1) if g <= h]
        if not opts:
            return False
        needs.append(opts)
    return _bijection_exists(needs)


def dominates_labels(l1, l2, leq) -> bool:
    """True iff a bijection pairs each label of ``l1`` with a <=-smaller label of ``l2``.

    ``leq(a, b)`` is the strength order ("b is at least as strong as a").
    """
    l1 = canon_config(l1)
    l2 = canon_config(l2)
    if len(l1) != len(l2):
        raise ArityError(f"arity mismatch: {len(l1)} vs {len(l2)}")
    needs = []
    for a in l2:
        opts = [j for j, b in enumerate(l1) if leq(a, b)]
        if not opts:
            return False
        needs.append(opts)
    return _bijection_exists(needs)


def expansion_size(c: Condensed) -> int:
    n = 1
    for g in c:
        n *= len(g)
    return n


def expand_condensed(c: Condensed, cap: int = DEFAULT_EXPANSION_CAP):
    """All configurations pickable from ``c`` (deduplicated, canonical)."""
    if expansion_size(c) > cap:
        raise ExpansionCapError(f"expansion of size > {cap} requested")
    out = {()}
    for g in c:
        out = {canon_config(q + (x,)) for q in out for x in g}
        if len(out) > cap:
            raise ExpansionCapError(f"expansion exceeded cap {cap}")
    return out


def expand_constraint(k: Constraint, cap: int = DEFAULT_EXPANSION_CAP):
    out = set()
    for c in k.configs:
        out |= expand_condensed(c, cap)
        if len(out) > cap:
            raise ExpansionCapError(f"expansion exceeded cap {cap}")
    return out


# ---------------------------------------------------------------------------
# File format


def _parse_group(tok: str, lineno: int, col: int):
    rep = 1
    if "^" in tok:
        tok, _, reps = tok.rpartition("^")
        if not reps.isdigit() or int(reps) < 1:
            raise ParseError(f"bad repetition count {reps!r}", lineno, col)
        rep = int(reps)
    if tok.startswith("["):
        if not tok.endswith("]"):
            raise ParseError(f"unterminated group {tok!r}", lineno, col)
        labels = [x.strip() for x in tok[1:-1].split(",")]
    else:
        labels = [tok]
    if any(not x for x in labels):
        raise ParseError("empty disjunction member", lineno, col)
    for x in labels:
        if not _TOKEN_RE.match(x):
            raise ParseError(f"bad label token {x!r}", lineno, col)
    return canon_group(labels), rep


def _split_line(line: str):
    # groups are whitespace-separated, but '[A, B]' may contain spaces
    toks, depth, cur = [], 0, ""
    for ch in line:
        if ch == "[":
            depth += 1
        elif ch == "]":
            depth -= 1
        if ch.isspace() and depth == 0:
            if cur:
                toks.append(cur)
            cur = ""
        else:
            cur += ch
    if cur:
        toks.append(cur)
    return toks


def parse_problem(text: str) -> Problem:
    name = ""
    sections = {"white": [], "black": []}
    sets = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if stripped.startswith("# set "):
            try:
                lhs, rhs = stripped[len("# set "):].split("=", 1)
            except ValueError:
                raise ParseError("malformed '# set' annotation", lineno)
            sets[lhs.strip()] = frozenset(
                m.strip() for m in rhs.split(",") if m.strip())
            continue
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("problem"):
            name = line[len("problem"):].strip()
            continue
        if line in sections:
            current = line
            continue
        if current is None:
            raise ParseError("configuration before 'white'/'black' header", lineno)
        groups = []
        col = 1
        for tok in _split_line(line):
            g, rep = _parse_group(tok, lineno, col)
            groups.extend([g] * rep)
            col += len(tok) + 1
        sections[current].append(canon_condensed(groups))
    for side in ("white", "black"):
        if not sections[side]:
            raise ParseError(f"missing or empty '{side}' section", len(text.splitlines()) + 1)
    try:
        white = Constraint.make(sections["white"])
        black = Constraint.make(sections["black"])
    except ArityError as e:
        raise ParseError(str(e), 0) from e
    return Problem(name, white, black, sets or None)


def _fmt_group(g: Group) -> str:
    labels = sorted(g, key=label_key)
    if len(labels) == 1:
        return labels[0]
    return "[" + ",".join(labels) + "]"


def _fmt_condensed(c: Condensed) -> str:
    parts = []
    i = 0
    while i < len(c):
        j = i
        while j < len(c) and c[j] == c[i]:
            j += 1
        s = _fmt_group(c[i])
        parts.append(s if j - i == 1 else f"{s}^{j - i}")
        i = j
    return " ".join(parts)


def serialize_problem(p: Problem) -> str:
    lines = []
    if p.name:
        lines.append(f"problem {p.name}")
    if p.sets is not None:
        # set-label membership survives the file round trip as structured
        # comments; plain parsers may ignore them
        for name in sorted(p.sets, key=label_key):
            members = ",".join(sorted(p.sets[name], key=label_key))
            lines.append(f"# set {name} = {members}")
    for side in ("white", "black"):
        lines.append(side)
        for c in getattr(p, side).configs:
            lines.append(_fmt_condensed(c))
    return "\n".join(lines) + "\n"
