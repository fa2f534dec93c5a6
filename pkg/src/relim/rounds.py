"""Round-elimination calculus: strength, diagrams, re/rere, relaxations.

The two central computations are:

* ``maximize_universal`` -- all maximal configurations of label sets whose
  every picking lies in a given constraint.  The ``combination`` method runs
  the union/intersection closure to a fixed point; the ``direct`` method
  enumerates candidate boxes over the expanded constraint and is used as an
  independent oracle on small inputs.
* the existential lift -- rewriting the untouched constraint side over the
  new set-label alphabet, done directly on condensed configurations.
"""

from __future__ import annotations

import itertools
import json
import math
import time
from collections import deque
from itertools import combinations_with_replacement
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Optional

from relim.core import (
    Condensed,
    Config,
    Constraint,
    ExpansionCapError,
    Problem,
    DEFAULT_EXPANSION_CAP,
    _bijection_exists,
    canon_condensed,
    canon_config,
    color_of,
    constraint_contains,
    dominates_config,
    expand_condensed,
    expand_constraint,
    expansion_size,
    group_key,
    label_key,
    pick_check,
)

# ---------------------------------------------------------------------------
# Universal containment of a condensed configuration in a constraint


def _iter_pickings(c: Condensed):
    # lazy product; no dedup (early exit makes dedup pointless)
    for choice in itertools.product(*[sorted(g, key=label_key) for g in c]):
        yield canon_config(choice)


def condensed_subset(d: Condensed, k: Constraint,
                     minimals: Optional[Callable] = None,
                     cap: int = DEFAULT_EXPANSION_CAP) -> Optional[Config]:
    """Check that *every* picking of ``d`` lies in ``k``.

    Returns None on success, or one failing picking as a witness.
    ``minimals``, when given, maps a group to an equivalent smaller group; it
    is only sound when ``k`` is upward-closed w.r.t. the corresponding order
    (see monotone_reducer).
    """
    # fast path: a single condensed member of k covering d groupwise
    for c in k.configs:
        if dominates_config(c, d):
            return None
    if minimals is not None:
        d = tuple(minimals(g) for g in d)
        for c in k.configs:
            if dominates_config(c, d):
                return None
    if expansion_size(d) > cap:
        raise ExpansionCapError(f"universal check would expand > {cap}")
    seen = set()
    for q in _iter_pickings(d):
        if q in seen:
            continue
        seen.add(q)
        if not constraint_contains(k, q):
            return q
    return None


def monotone_reducer(k: Constraint, sets: Optional[Mapping]):
    """Group reducer for condensed_subset, if ``k`` permits one.

    When every disjunction of ``k`` is upward-closed under the set-inclusion
    order of the labels (labels denote sets via ``sets``), membership in
    ``k`` is preserved by replacing a label with any superset label, so the
    universal check only needs inclusion-minimal representatives per group.
    """
    if not sets:
        return None
    alphabet = [x for x in sorted(sets, key=label_key)]

    def supersets(x):
        sx = sets[x]
        return [y for y in alphabet if y != x and sx < sets.get(y, frozenset())]

    sup = {x: supersets(x) for x in alphabet}
    for c in k.configs:
        for g in c:
            for x in g:
                if x not in sup or any(y not in g for y in sup[x]):
                    return None

    def minimals(g):
        keep = [x for x in g if not any(sets.get(y, frozenset()) < sets[x] for y in g if y != x)]
        return frozenset(keep)

    return minimals


# ---------------------------------------------------------------------------
# Strength and diagrams


def strength_leq(a: str, b: str, k: Constraint,
                 minimals: Optional[Callable] = None) -> bool:
    """Is ``b`` at least as strong as ``a`` w.r.t. constraint ``k``?

    Every configuration of ``k`` containing ``a`` must remain in ``k`` after
    one occurrence of ``a`` is replaced by ``b``.
    """
    if a == b:
        return True
    for c in k.configs:
        for u, g in enumerate(c):
            if a in g:
                d = c[:u] + (frozenset([b]),) + c[u + 1:]
                if condensed_subset(d, k, minimals) is not None:
                    return False
    return True


@dataclass(frozen=True)
class StrengthRelation:
    domain: tuple
    pairs: frozenset  # ordered (a, b) with a <= b

    def leq(self, a: str, b: str) -> bool:
        if a == b:
            return True
        if a not in self.domain or b not in self.domain:
            raise KeyError(f"label outside relation domain: {a!r} or {b!r}")
        return (a, b) in self.pairs

    def lt(self, a: str, b: str) -> bool:
        return a != b and (a, b) in self.pairs and (b, a) not in self.pairs

    def gen(self, labels: Iterable[str]) -> frozenset:
        """All labels at least as strong as one of ``labels``."""
        out = set()
        for a in labels:
            out.add(a)
            out.update(b for b in self.domain if a != b and (a, b) in self.pairs)
        return frozenset(out)


def strength_relation(p: Problem, side: str) -> StrengthRelation:
    k = getattr(p, side)
    labels = sorted(p.alphabet, key=label_key)
    minimals = monotone_reducer(k, p.sets)
    pairs = set()
    for a in labels:
        for b in labels:
            if a != b and strength_leq(a, b, k, minimals):
                pairs.add((a, b))
    return StrengthRelation(tuple(labels), frozenset(pairs))


@dataclass(frozen=True)
class Diagram:
    nodes: tuple
    edges: tuple  # transitive reduction of the strict strength order
    equal_pairs: tuple  # mutually-<= label pairs, reported for merging
    relation: StrengthRelation

    def successors(self, a: str):
        return tuple(b for (x, b) in self.edges if x == a)

    def to_dot(self) -> str:
        lines = ["digraph diagram {"]
        for n in self.nodes:
            lines.append(f'  "{n}";')
        for a, b in self.edges:
            lines.append(f'  "{a}" -> "{b}";')
        lines.append("}")
        return "\n".join(lines)


def diagram(p: Problem, side: str, rel: Optional[StrengthRelation] = None) -> Diagram:
    rel = rel or strength_relation(p, side)
    labels = rel.domain
    equal = tuple(sorted((a, b) for a in labels for b in labels
                         if a < b and (a, b) in rel.pairs and (b, a) in rel.pairs))
    edges = []
    for a in labels:
        for b in labels:
            if rel.lt(a, b) and not any(rel.lt(a, c) and rel.lt(c, b) for c in labels):
                edges.append((a, b))
    return Diagram(labels, tuple(sorted(edges)), equal, rel)


# ---------------------------------------------------------------------------
# Universal-quantifier maximization


def _combine(c1: Condensed, c2: Condensed, out: list):
    """All combinations of c1 and c2 (any union position, any pairing).

    Pairings that intersect to an empty group somewhere are skipped (the
    result represents nothing); so are pairings whose union position holds
    comparable sets (the result is dominated by c1 or c2).
    """
    k = len(c1)

    def go(j: int, used: int, groups: tuple, u_done: bool):
        if j == k:
            if u_done:
                out.append(canon_condensed(groups))
            return
        g = c1[j]
        for i in range(k):
            bit = 1 << i
            if used & bit:
                continue
            h = c2[i]
            inter = g & h
            if inter:
                go(j + 1, used | bit, groups + (inter,), u_done)
            if not u_done and not (g <= h or h <= g):
                go(j + 1, used | bit, groups + (g | h,), True)

    go(0, 0, (), False)


class _Antichain:
    """Maintains a collection of condensed configurations with no member
    dominated by another."""

    def __init__(self):
        self.items = []

    def add(self, c: Condensed) -> bool:
        for x in self.items:
            if dominates_config(x, c):
                return False
        self.items = [x for x in self.items if not dominates_config(c, x)]
        self.items.append(c)
        return True


def _maximize_combination(k: Constraint) -> list:
    chain = _Antichain()
    work = deque()
    for c in k.configs:
        if chain.add(c):
            work.append(c)
    while work:
        c1 = work.popleft()
        if c1 not in chain.items:
            continue
        for c2 in list(chain.items):
            combos = []
            # combination is symmetric in (c1, c2), one orientation suffices
            _combine(c1, c2, combos)
            for c in combos:
                if chain.add(c):
                    work.append(c)
    return chain.items


def _maximize_direct(k: Constraint, cap: int) -> list:
    explicit = expand_constraint(k, cap)
    labels = sorted(k.labels(), key=label_key)
    r = k.arity

    def valid(box) -> bool:
        if expansion_size(box) > cap:
            raise ExpansionCapError("direct maximization box too large")
        return all(q in explicit for q in expand_condensed(box, cap))

    # In a box all of whose pickings are allowed and that cannot be grown,
    # each group equals the set of labels compatible with every picking of
    # the other groups, i.e. an intersection of "row sets"
    #   R(s) = {x : the word x + s is allowed},   s a length-(r-1) suffix.
    # So every group of a maximal box lives in the intersection closure of
    # the row sets, which stays small; enumerate candidate boxes from it.
    rows = set()
    for q in explicit:
        for i in range(r):
            s = q[:i] + q[i + 1:]
            rows.add(s)
    row_sets = {}
    for s in rows:
        row_sets[s] = frozenset(
            x for x in labels if canon_config(s + (x,)) in explicit)
    family = set(row_sets.values())
    frontier = set(family)
    while frontier:
        fresh = set()
        for a in frontier:
            for b in row_sets.values():
                c = a & b
                if c and c not in family:
                    family.add(c)
                    fresh.add(c)
        frontier = fresh
    candidates = sorted(family, key=group_key)
    if math.comb(len(candidates) + r - 1, r) > cap:
        raise ExpansionCapError("direct maximization candidate space too large")

    chain = _Antichain()
    for groups in combinations_with_replacement(candidates, r):
        box = canon_condensed(groups)
        if not valid(box):
            continue
        # keep only boxes no single label can extend
        maximal = True
        for j in range(len(box)):
            rest = box[:j] + box[j + 1:]
            others = expand_condensed(rest, cap)
            ext = set(labels) - box[j]
            for s in others:
                ext &= row_sets.get(s, frozenset())
                if not ext:
                    break
            if ext:
                maximal = False
                break
        if maximal:
            chain.add(box)
    return chain.items


def maximize_universal(k: Constraint, method: str = "combination",
                       cap: int = DEFAULT_EXPANSION_CAP) -> tuple:
    """All maximal configurations of sets every picking of which is in ``k``.

    Returns a canonically sorted tuple of condensed configurations (each
    disjunction read as a set label).
    """
    if method == "combination":
        items = _maximize_combination(k)
    elif method == "direct":
        items = _maximize_direct(k, cap)
    else:
        raise ValueError(f"unknown method {method!r}")
    return tuple(sorted(items, key=lambda c: tuple(group_key(g) for g in c)))


# ---------------------------------------------------------------------------
# re / rere


def name_set_labels(sets: Iterable[frozenset]) -> dict:
    """Deterministic token names for set labels.

    Singletons reuse the member name; a larger set whose members share a
    color c becomes S<k>_c; mixed-color sets become S<k>.
    """
    ordered = sorted(set(sets), key=group_key)
    names = {}
    used = set()
    for s in ordered:
        if len(s) == 1:
            names[s] = next(iter(s))
            used.add(names[s])
    counter = 0
    for s in ordered:
        if len(s) == 1:
            continue
        colors = {color_of(x) for x in s}
        suffix = f"_{colors.pop()}" if len(colors) == 1 and None not in colors else ""
        # member names may themselves look like S<k>_c (iterated application);
        # skip candidates already taken by a singleton
        while True:
            counter += 1
            cand = f"S{counter}{suffix}"
            if cand not in used:
                break
        names[s] = cand
        used.add(cand)
    return names


def lift_constraint(k: Constraint, sets: Mapping) -> Constraint:
    """Existential lift of ``k`` over a set-label alphabet.

    Each source label group g becomes the disjunction of all set labels
    meeting g; configurations acquiring an empty disjunction are dropped.
    """
    out = []
    for c in k.configs:
        groups = []
        for g in c:
            dis = frozenset(name for name, s in sets.items() if s & g)
            if not dis:
                break
            groups.append(dis)
        else:
            out.append(canon_condensed(groups))
    return Constraint.make(out, arity=k.arity)


def _apply_re(p: Problem, maximize_side: str, method: str, cap: int) -> Problem:
    lift_side = "white" if maximize_side == "black" else "black"
    maxed = maximize_universal(getattr(p, maximize_side), method, cap)
    names = name_set_labels(g for c in maxed for g in c)
    sets = {names[g]: g for c in maxed for g in c}
    maxed_named = Constraint.make(
        [[[names[g]] for g in c] for c in maxed],
        arity=getattr(p, maximize_side).arity)
    lifted = lift_constraint(getattr(p, lift_side), sets)
    kw = {maximize_side: maxed_named, lift_side: lifted}
    op = "re" if maximize_side == "black" else "rere"
    name = f"{op}({p.name})" if p.name else ""
    out = Problem(name, sets=sets, **kw)
    # only labels occurring in the constraints belong to the alphabet
    drop = set(sets) - set(out.alphabet)
    if drop:
        out = Problem(name, out.white, out.black,
                      {n: s for n, s in sets.items() if n not in drop})
    return out


def re(p: Problem, method: str = "combination", cap: int = DEFAULT_EXPANSION_CAP) -> Problem:
    """Black-maximizing round elimination."""
    return _apply_re(p, "black", method, cap)


def rere(p: Problem, method: str = "combination", cap: int = DEFAULT_EXPANSION_CAP) -> Problem:
    """White-maximizing round elimination."""
    return _apply_re(p, "white", method, cap)


# ---------------------------------------------------------------------------
# Relaxations


def merge_labels(p: Problem, a: str, b: str) -> Problem:
    """Relax ``p`` by identifying label ``a`` with label ``b``."""
    if a == b:
        raise ValueError("cannot merge a label with itself")
    for x in (a, b):
        if x not in p.alphabet:
            raise KeyError(f"unknown label {x!r}")

    def subst(k: Constraint) -> Constraint:
        return Constraint.make(
            [[(g - {a}) | {b} if a in g else g for g in c] for c in k.configs],
            arity=k.arity)

    sets = None
    if p.sets is not None:
        sets = {n: s for n, s in p.sets.items() if n != a}
    name = f"{p.name}[{a}->{b}]" if p.name else ""
    return Problem(name, subst(p.white), subst(p.black), sets)


def new_labels(p: Problem) -> frozenset:
    """Labels denoting non-singleton sets (the 'new' labels after re/rere)."""
    if p.sets is None:
        return frozenset()
    return frozenset(n for n in p.alphabet if len(p.sets.get(n, frozenset([n]))) >= 2)


def heuristic_relax_step(p: Problem, newness: Optional[frozenset] = None,
                         side: str = "white",
                         diag: Optional[Diagram] = None) -> Optional[tuple]:
    """One merge suggested by the diagram rule: a new label a with nonzero
    indegree whose unique successor b is a sink or itself new.  Returns the
    lexicographically smallest such (a, b), or None."""
    if newness is None:
        newness = new_labels(p)
    d = diag or diagram(p, side)
    indeg = {n: 0 for n in d.nodes}
    outs = {n: [] for n in d.nodes}
    for x, y in d.edges:
        indeg[y] += 1
        outs[x].append(y)
    best = None
    for a in d.nodes:
        if a not in newness or indeg[a] == 0 or len(outs[a]) != 1:
            continue
        b = outs[a][0]
        if outs[b] and b not in newness:
            continue
        if best is None or (a, b) < best:
            best = (a, b)
    return best


@dataclass
class RelaxationReport:
    ok: bool
    failures: list
    stats: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps({"ok": self.ok, "failures": self.failures,
                           "stats": self.stats}, indent=2)


def _resolve_sets(p: Problem) -> dict:
    if p.sets is None:
        raise ValueError("candidate problem carries no set-label map")
    return dict(p.sets)


def _condensed_dominates_set_config(d: Condensed, target: Condensed, sets: Mapping) -> bool:
    # can we pick one label per group of d whose denoted sets cover the
    # groups of target, bijectively?
    if len(d) != len(target):
        return False
    needs = []
    for g in target:
        opts = [j for j, h in enumerate(d) if any(g <= sets[x] for x in h)]
        if not opts:
            return False
        needs.append(opts)
    return _bijection_exists(needs)


def constraint_subset(a: Constraint, b: Constraint,
                      minimals: Optional[Callable] = None,
                      cap: int = DEFAULT_EXPANSION_CAP):
    """Every configuration of ``a`` is in ``b``; returns a witness or None."""
    for c in a.configs:
        w = condensed_subset(c, b, minimals, cap)
        if w is not None:
            return w
    return None


def constraints_equal(a: Constraint, b: Constraint, cap: int = DEFAULT_EXPANSION_CAP) -> bool:
    return (constraint_subset(a, b, cap=cap) is None
            and constraint_subset(b, a, cap=cap) is None)


def _check_relaxation(source: Problem, candidate: Problem, maximize_side: str,
                      method: str, cap: int) -> RelaxationReport:
    t0 = time.monotonic()
    lift_side = "white" if maximize_side == "black" else "black"
    failures = []
    sets = _resolve_sets(candidate)

    maxed = maximize_universal(getattr(source, maximize_side), method, cap)
    cand_max = getattr(candidate, maximize_side)
    for c in maxed:
        if not any(_condensed_dominates_set_config(d, c, sets) for d in cand_max.configs):
            failures.append({
                "check": f"domination({maximize_side})",
                "configuration": [sorted(g, key=label_key) for g in c],
                "reason": "no candidate configuration dominates it",
            })

    # the alphabet must be exactly what occurs on the maximized side
    extra = set(candidate.alphabet) - set(x for c in cand_max.configs for g in c for x in g)
    for x in sorted(extra, key=label_key):
        failures.append({"check": "alphabet",
                         "configuration": [x],
                         "reason": f"label occurs only in the {lift_side} constraint"})

    lifted = lift_constraint(getattr(source, lift_side), sets)
    cand_lift = getattr(candidate, lift_side)
    minimals = monotone_reducer(cand_lift, sets)
    w = constraint_subset(lifted, cand_lift, minimals, cap)
    if w is not None:
        failures.append({"check": f"lift({lift_side})", "configuration": list(w),
                         "reason": "configuration of the lift missing from candidate"})
    minimals2 = monotone_reducer(lifted, sets)
    w = constraint_subset(cand_lift, lifted, minimals2, cap)
    if w is not None:
        failures.append({"check": f"lift({lift_side})", "configuration": list(w),
                         "reason": "candidate configuration absent from the lift"})

    stats = {
        "configs_in": len(getattr(source, maximize_side)) + len(getattr(source, lift_side)),
        "configs_out": len(maxed),
        "wall_ms": int((time.monotonic() - t0) * 1000),
    }
    return RelaxationReport(not failures, failures, stats)


def check_relaxation_of_re(source: Problem, candidate: Problem,
                           method: str = "combination",
                           cap: int = DEFAULT_EXPANSION_CAP) -> RelaxationReport:
    """Is ``candidate`` a relaxation of re(source)?"""
    return _check_relaxation(source, candidate, "black", method, cap)


def check_relaxation_of_rere(source: Problem, candidate: Problem,
                             method: str = "combination",
                             cap: int = DEFAULT_EXPANSION_CAP) -> RelaxationReport:
    """Is ``candidate`` a relaxation of rere(source)?"""
    return _check_relaxation(source, candidate, "white", method, cap)


# ---------------------------------------------------------------------------
# Zero-round solvability


def zero_round_solvable(p: Problem, colored: bool = True,
                        cap: int = DEFAULT_EXPANSION_CAP):
    """Search for a 0-round output rule; returns a witness or None.

    With a proper coloring, all white nodes must emit one fixed label per
    color and each black node of color c then sees that label three times
    (arity many times); without the coloring, ports are adversarial and any
    black-arity multiset over the chosen configuration's labels may occur.
    """
    db = p.black.arity
    good = {x for x in p.alphabet
            if constraint_contains(p.black, [x] * db)}
    if colored:
        for c in p.white.configs:
            if all(g & good for g in c):
                picked = [sorted(g & good, key=label_key)[0] for g in c]
                colors = [color_of(x) for x in picked]
                if None not in colors and len(set(colors)) == len(colors):
                    return {c: x for c, x in zip(colors, picked)}
                return {j + 1: x for j, x in enumerate(picked)}
        return None
    for c in p.white.configs:
        seen = set()
        for q in _iter_pickings(c):
            if q in seen:
                continue
            seen.add(q)
            if len(seen) > cap:
                raise ExpansionCapError("zero-round search exceeded cap")
            support = sorted(set(q), key=label_key)
            if all(constraint_contains(p.black, list(m))
                   for m in itertools.combinations_with_replacement(support, db)):
                return list(q)
    return None
