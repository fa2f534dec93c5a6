"""Concrete problem families and the end-to-end lower-bound chain verifier.

The generators build, for a degree parameter ``delta``:

* ``iterated_ghz`` / ``iterated_chsh`` -- the chained-game problems, where
  each label carries a color plus in/out bits and the white constraint wires
  the output of each game into the input of the next one;
* ``pi(i, delta)`` -- the family of progressively easier problems obtained by
  discarding the last ``i`` colors;
* ``pi_prime(i, delta)`` -- the hand-relaxed form of one round-elimination
  step applied to ``pi(i, delta)``, whose labels are right-closed sets.

``verify_sequence`` runs the whole chain at a concrete ``delta``: both
relaxation checks per step, the renaming back onto ``pi(i+1, delta)``, and
the final 0-round unsolvability of the endpoint.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import combinations_with_replacement, product
from typing import Optional

from relim.core import (
    Constraint,
    Problem,
    DEFAULT_EXPANSION_CAP,
    constraint_contains,
    expand_condensed,
    group_key,
)
from relim.rounds import (
    StrengthRelation,
    check_relaxation_of_re,
    check_relaxation_of_rere,
    constraints_equal,
    lift_constraint,
    name_set_labels,
    strength_relation,
    zero_round_solvable,
)


# ---------------------------------------------------------------------------
# Label constructors.  The trailing _j suffix is the color.


def _my(j: int, y: int) -> str:
    return f"MY{y}_{j}"


def _xy(j: int, x: int, y: int) -> str:
    return f"X{x}{y}_{j}"


def _xm(j: int, x: int) -> str:
    return f"XM{x}_{j}"


def _mm(j: int) -> str:
    return f"MM_{j}"


def _ee(j: int) -> str:
    return f"EE_{j}"


def _e(j: int) -> str:
    return f"E_{j}"


def _q(j: int) -> str:
    return f"Q_{j}"


# ---------------------------------------------------------------------------
# Iterated GHZ and iterated CHSH


def bit_configs(j: int) -> list:
    """The 15 single-color GHZ configurations over (in, out) bit labels.

    A triple is allowed unless the number of in-bits set to 1 is even and
    the XOR of the out-bits differs from the OR of the in-bits.
    """
    out = []
    for triple in combinations_with_replacement(product((0, 1), (0, 1)), 3):
        xs = [x for x, _ in triple]
        ys = [y for _, y in triple]
        if sum(xs) % 2 == 0 and (ys[0] ^ ys[1] ^ ys[2]) != (1 if any(xs) else 0):
            continue
        out.append([[_xy(j, x, y)] for x, y in triple])
    return out


def iterated_ghz(delta: int) -> Problem:
    """The chained-GHZ problem on (delta,3)-biregular graphs."""
    if delta < 2:
        raise ValueError("iterated_ghz requires delta >= 2")
    white = []
    for ys in product((0, 1), repeat=delta):
        cfg = [[_my(1, ys[0])]]
        cfg += [[_xy(j, ys[j - 2], ys[j - 1])] for j in range(2, delta + 1)]
        white.append(cfg)
    black = [[[_my(1, 0)], [_my(1, 0)], [_my(1, 1)]]]
    for j in range(2, delta + 1):
        black += bit_configs(j)
    return Problem(f"ghz-{delta}",
                   Constraint.make(white, arity=delta),
                   Constraint.make(black, arity=3))


def iterated_chsh(delta: int) -> Problem:
    """The chained-CHSH problem: white players of degree delta, black
    2-player games of degree 2; color-1 in-bits are hardcoded to 1."""
    if delta < 1:
        raise ValueError("iterated_chsh requires delta >= 1")
    white = []
    for ys in product((0, 1), repeat=delta):
        v = (1,) + ys
        white.append([[_xy(c, v[c - 1], v[c])] for c in range(1, delta + 1)])
    black = []
    for c in range(1, delta + 1):
        ins = (1,) if c == 1 else (0, 1)
        for (x1, y1), (x2, y2) in combinations_with_replacement(
                product(ins, (0, 1)), 2):
            if x1 * x2 == y1 ^ y2:
                black.append([[_xy(c, x1, y1)], [_xy(c, x2, y2)]])
    return Problem(f"chsh-{delta}",
                   Constraint.make(white, arity=delta),
                   Constraint.make(black, arity=2))


# ---------------------------------------------------------------------------
# The problems pi(i, delta)

# The 22 maximal set configurations over one color's bit labels: every
# picking is one of the 15 bit configurations, and no member dominates
# another.  "01" stands for the label with in-bit 0 and out-bit 1.
_MAXIMIZED_BIT_SETS = (
    (("00", "10", "11"), ("00",), ("00",)),
    (("01", "10", "11"), ("00",), ("01",)),
    (("00", "10", "11"), ("01",), ("01",)),
    (("00", "01", "11"), ("00",), ("10",)),
    (("00", "01", "10"), ("00",), ("11",)),
    (("00", "01", "10"), ("01",), ("10",)),
    (("00", "01", "11"), ("01",), ("11",)),
    (("01", "10", "11"), ("10",), ("10",)),
    (("00", "10", "11"), ("10",), ("11",)),
    (("01", "10", "11"), ("11",), ("11",)),
    (("00", "10"), ("00",), ("00", "11")),
    (("01", "11"), ("00",), ("01", "10")),
    (("00", "10"), ("01",), ("01", "10")),
    (("01", "11"), ("00", "11"), ("01",)),
    (("00", "10"), ("01", "11"), ("10",)),
    (("11",), ("00", "10"), ("00", "10")),
    (("10",), ("01", "10"), ("01", "10")),
    (("10",), ("00", "11"), ("00", "11")),
    (("00", "11"), ("01", "10"), ("11",)),
    (("11",), ("01", "11"), ("01", "11")),
    (("10", "11"), ("00", "01"), ("00", "01")),
    (("10", "11"), ("10", "11"), ("10", "11")),
)


def maximized_bit_configs(j: int) -> list:
    """The 22 maximal universal configurations over color-j bit labels."""
    return [[[_xy(j, int(p[0]), int(p[1])) for p in s] for s in cfg]
            for cfg in _MAXIMIZED_BIT_SETS]


def _color_labels(j: int, special: bool) -> list:
    labs = [_mm(j), _my(j, 0), _my(j, 1)]
    labs += [_xy(j, x, y) for x in (0, 1) for y in (0, 1)]
    if not special:
        labs += [_ee(j), _xm(j, 0), _xm(j, 1)]
    return labs


def _present_black(j: int, special: bool) -> list:
    """The per-color condensed black constraint of a present color >= 2.

    Starts from the 22 maximal bit-set configurations, closes each group
    under the one-bit-erased labels it implies, adds MM everywhere, and
    appends the catch-all configuration; a special color has no XM or EE
    labels, so those are stripped.
    """
    out = []
    for cfg in _MAXIMIZED_BIT_SETS:
        groups = []
        for s in cfg:
            g = {_xy(j, int(p[0]), int(p[1])) for p in s}
            if {"00", "01"} <= set(s):
                g.add(_xm(j, 0))
            if {"10", "11"} <= set(s):
                g.add(_xm(j, 1))
            if {"00", "10"} <= set(s):
                g.add(_my(j, 0))
            if {"01", "11"} <= set(s):
                g.add(_my(j, 1))
            g.add(_mm(j))
            if special:
                g -= {_xm(j, 0), _xm(j, 1)}
            groups.append(sorted(g))
        out.append(groups)
    out.append([[_mm(j)], _color_labels(j, special), _color_labels(j, special)])
    return out


def _check_pi_params(i: int, delta: int, max_i: int) -> None:
    if delta < 3:
        raise ValueError("delta must be at least 3")
    if not 0 <= i <= max_i:
        raise ValueError(f"i must be in [0, {max_i}] for delta={delta}, got {i}")


def pi(i: int, delta: int) -> Problem:
    """The i-th problem of the hardness chain at degree delta.

    Colors above delta-i are gone (their games are already over), color
    delta-i is special, the rest are present.
    """
    _check_pi_params(i, delta, delta - 2)
    x = delta - i
    gone = range(x + 1, delta + 1)

    white = []
    # chain configurations: an uncancelled run of bits from position a to b,
    # blank markers before/after, question marks on gone colors
    for a in range(1, x + 1):
        for b in range(a + 1, x + 2):
            if b == x:
                continue
            for bits in product((0, 1), repeat=b - a):
                y = {j: bits[j - a] for j in range(a, b)}
                cfg = []
                for j in range(1, delta + 1):
                    if j < a:
                        lab = _mm(j)
                    elif j == a:
                        lab = _my(j, y[j])
                    elif j < b:
                        lab = _xy(j, y[j - 1], y[j])
                    elif j == b and b <= x:
                        lab = _xm(j, y[j - 1])
                    elif j <= x:
                        lab = _mm(j)
                    else:
                        lab = _q(j)
                    cfg.append([lab])
                white.append(cfg)
    # fully blank runs with one grabbed position
    for a in range(1, x):
        white.append([[_ee(a) if j == a else _mm(j)] for j in range(1, x + 1)]
                     + [[_q(j)] for j in gone])
    for a in gone:
        white.append([[_mm(j)] for j in range(1, x + 1)]
                     + [[_e(a) if j == a else _q(j)] for j in gone])

    black = []
    for j in gone:
        black.append([[_e(j), _q(j)], [_e(j), _q(j)], [_q(j)]])
    black.append([[_ee(1), _mm(1), _my(1, 0), _my(1, 1)], [_mm(1)],
                  [_mm(1), _my(1, 0)]])
    black.append([[_mm(1), _my(1, 0)], [_mm(1), _my(1, 0)],
                  [_mm(1), _my(1, 1)]])
    for j in range(2, x):
        black += _present_black(j, special=False)
    black += _present_black(x, special=True)

    return Problem(f"pi-{i}-{delta}",
                   Constraint.make(white, arity=delta),
                   Constraint.make(black, arity=3))


# ---------------------------------------------------------------------------
# The problems pi_prime(i, delta)

# Black constraint of pi_prime for a present color >= 2, as tuples of
# generated sets; each inner tuple lists the generating labels (the set also
# contains everything stronger than them).
_PRIME_PRESENT_BLACK = (
    (("MM",), ("EE",), ("EE",)),
    (("MY0", "XM1"), ("X00",), ("X00",)),
    (("MY1", "XM1"), ("X00",), ("X01",)),
    (("MY0", "XM1"), ("X01",), ("X01",)),
    (("MY1", "XM0"), ("X00",), ("X10",)),
    (("MY0", "XM0"), ("X00",), ("X11",)),
    (("MY0", "XM0"), ("X01",), ("X10",)),
    (("MY1", "XM0"), ("X01",), ("X11",)),
    (("MY1", "XM1"), ("X10",), ("X10",)),
    (("MY0", "XM1"), ("X10",), ("X11",)),
    (("MY1", "XM1"), ("X11",), ("X11",)),
    (("MY0",), ("X00",), ("X00", "X11")),
    (("MY1",), ("X00",), ("X01", "X10")),
    (("MY0",), ("X01",), ("X01", "X10")),
    (("MY1",), ("X00", "X11"), ("X01",)),
    (("MY0",), ("MY1",), ("X10",)),
    (("X11",), ("MY0",), ("MY0",)),
    (("X10",), ("X01", "X10"), ("X01", "X10")),
    (("X10",), ("X00", "X11"), ("X00", "X11")),
    (("X00", "X11"), ("X01", "X10"), ("X11",)),
    (("X11",), ("MY1",), ("MY1",)),
    (("XM1",), ("XM0",), ("XM0",)),
    (("XM1",), ("XM1",), ("XM1",)),
)

# sentinel keys for the three special-color set labels (no label token may
# start with an underscore, so these cannot collide)
_KEY_A = "_A"    # generated by {X00_x, X01_x}
_KEY_B = "_B"    # generated by {X10_x, X11_x}
_KEY_MY = "_MY"  # generated by {MY0_x, MY1_x}


def _nplus_keys(i: int, delta: int) -> list:
    """The condensed white skeleton shared by pi_prime and the second step.

    Each configuration is a tuple of disjunctions; a disjunction is a tuple
    of keys, where a key is either a base label of pi(i, delta) (standing
    for the set generated by it) or one of the special-color sentinels.
    """
    x = delta - i
    sp = (_KEY_A, _KEY_B)
    out = []
    for a in range(1, x):
        for b in range(a + 1, x + 1):
            for bits in product((0, 1), repeat=b - a):
                y = {j: bits[j - a] for j in range(a, b)}
                cfg = []
                for j in range(1, delta + 1):
                    if j < a:
                        cfg.append((_mm(j),))
                    elif j == a:
                        cfg.append((_my(j, y[j]),))
                    elif j < b:
                        cfg.append((_xy(j, y[j - 1], y[j]),))
                    elif j == b and b <= x - 1:
                        cfg.append((_xm(j, y[j - 1]),))
                    elif j <= x - 1:
                        cfg.append((_mm(j),))
                    elif j == x:
                        if b == x:
                            cfg.append((_KEY_A if y[b - 1] == 0 else _KEY_B,))
                        else:
                            cfg.append(sp)
                    else:
                        cfg.append((_q(j),))
                out.append(tuple(cfg))
    for a in range(1, x):
        out.append(tuple((_ee(a) if j == a else _mm(j),) for j in range(1, x))
                   + (sp,) + tuple((_q(j),) for j in range(x + 1, delta + 1)))
    for a in range(x + 1, delta + 1):
        out.append(tuple((_mm(j),) for j in range(1, x)) + (sp,)
                   + tuple((_e(j) if j == a else _q(j),)
                           for j in range(x + 1, delta + 1)))
    out.append(tuple((_mm(j),) for j in range(1, x)) + ((_KEY_MY,),)
               + tuple((_q(j),) for j in range(x + 1, delta + 1)))
    return out


@dataclass
class _PrimeInfo:
    problem: Problem
    relation: StrengthRelation  # black-side strength of pi(i, delta)
    n_of: dict                  # base label of pi -> label name in pi_prime
    n_a: str                    # name of the set generated by {X00_x, X01_x}
    n_b: str                    # name of the set generated by {X10_x, X11_x}
    n_my: str                   # name of the set generated by {MY0_x, MY1_x}


def _build_pi_prime(i: int, delta: int) -> _PrimeInfo:
    _check_pi_params(i, delta, delta - 3)
    x = delta - i
    src = pi(i, delta)
    rel = strength_relation(src, "black")
    gen = rel.gen

    black_sets = []
    for j in range(x + 1, delta + 1):
        black_sets.append((gen([_e(j)]), gen([_e(j)]), gen([_q(j)])))
    black_sets.append((gen([_ee(1)]), gen([_mm(1)]), gen([_my(1, 0)])))
    black_sets.append((gen([_my(1, 0)]), gen([_my(1, 0)]), gen([_my(1, 1)])))
    for j in range(2, x):
        for pat in _PRIME_PRESENT_BLACK:
            black_sets.append(tuple(gen([f"{t}_{j}" for t in grp])
                                    for grp in pat))
    set_a = gen([_xy(x, 0, 0), _xy(x, 0, 1)])
    set_b = gen([_xy(x, 1, 0), _xy(x, 1, 1)])
    set_my = gen([_my(x, 0), _my(x, 1)])
    black_sets.append((set_a, set_my, set_my))
    black_sets.append((set_b, set_my, set_my))

    sigma = sorted({s for cfg in black_sets for s in cfg}, key=group_key)
    names = name_set_labels(sigma)
    sets = {names[s]: s for s in sigma}
    specials = {_KEY_A: set_a, _KEY_B: set_b, _KEY_MY: set_my}

    def resolve(key: str) -> frozenset:
        s = specials.get(key) or gen([key])
        if s not in names:
            raise AssertionError(f"white label generated by {key!r} does not "
                                 "occur in the black constraint")
        return s

    white = []
    for cfg in _nplus_keys(i, delta):
        groups = []
        for dis in cfg:
            members = {resolve(k) for k in dis}
            members.update(s for s in sigma
                           if any(s > m for m in list(members)))
            groups.append([names[s] for s in members])
        white.append(groups)

    prob = Problem(f"pi-prime-{i}-{delta}",
                   Constraint.make(white, arity=delta),
                   Constraint.make([[[names[s]] for s in cfg]
                                    for cfg in black_sets], arity=3),
                   sets)
    n_of = {}
    for cfg in _nplus_keys(i, delta):
        for dis in cfg:
            for k in dis:
                if k not in specials:
                    n_of[k] = names[gen([k])]
    return _PrimeInfo(prob, rel, n_of, names[set_a], names[set_b],
                      names[set_my])


def pi_prime(i: int, delta: int) -> Problem:
    """The hand-relaxed one-step problem: labels are right-closed sets of
    pi(i, delta) labels, the black constraint is the explicit per-color
    generated-set list, and the white constraint is its superset closure."""
    return _build_pi_prime(i, delta).problem


# ---------------------------------------------------------------------------
# The second step: from rere(pi_prime) back to pi(i+1, delta)


def _build_second_step(info: _PrimeInfo, i: int, delta: int,
                       rel2: StrengthRelation) -> Problem:
    """The explicit relaxation target for rere(pi_prime(i, delta)).

    White labels are sets of pi_prime labels generated over its white-side
    diagram, one configuration per white skeleton entry; the two halves of
    the special color are merged into their union label and configurations
    keeping an XM label at the new last present color are dropped (they are
    dominated).  The black constraint is the existential lift.
    """
    x = delta - i
    gen2 = rel2.gen
    keymap = {_KEY_A: info.n_a, _KEY_B: info.n_b, _KEY_MY: info.n_my}

    def nm(key: str) -> str:
        return keymap.get(key) or info.n_of[key]

    configs = {tuple(gen2([nm(k) for k in dis]) for dis in cfg)
               for cfg in _nplus_keys(i, delta)}

    half_a = gen2([info.n_a])
    half_b = gen2([info.n_b])
    union_ab = gen2([info.n_a, info.n_b])
    configs = {tuple(union_ab if s in (half_a, half_b) else s for s in cfg)
               for cfg in configs}

    # after the merge, the configurations keeping an XM or EE label at the
    # color that turns special next are dominated by MY-ended ones
    jcut = x - 1
    dropped = {gen2([info.n_of[_xm(jcut, bit)]]) for bit in (0, 1)}
    dropped.add(gen2([info.n_of[_ee(jcut)]]))
    configs = {cfg for cfg in configs if cfg[jcut - 1] not in dropped}

    sigma = sorted({s for cfg in configs for s in cfg}, key=group_key)
    names = name_set_labels(sigma)
    sets = {names[s]: s for s in sigma}
    white = Constraint.make([[[names[s]] for s in cfg] for cfg in configs],
                            arity=delta)
    black = lift_constraint(info.problem.black, sets)
    return Problem(f"pi-second-{i}-{delta}", white, black, sets)


def rename_after_second_step(p: Problem, i: int, delta: int,
                             _ctx: Optional[tuple] = None) -> Problem:
    """Rename the second-step problem's set labels back to plain labels.

    A label generated by a single non-special label keeps that name; the
    merged special-color label becomes Q and the grabbing-special label
    becomes E (the special color turns gone).  Raises KeyError for a label
    outside this mapping.
    """
    if _ctx is None:
        info = _build_pi_prime(i, delta)
        rel2 = strength_relation(info.problem, "white")
    else:
        info, rel2 = _ctx
    gen2 = rel2.gen
    x = delta - i

    ren = {}
    for base, n in info.n_of.items():
        ren[gen2([n])] = base
    ren[gen2([info.n_a, info.n_b])] = _q(x)
    ren[gen2([info.n_my])] = _e(x)

    if p.sets is None:
        raise ValueError("problem carries no set-label map")
    mapping = {}
    for name, s in p.sets.items():
        if s not in ren:
            raise KeyError(f"label {name!r} denotes a set outside the "
                           "renaming domain")
        mapping[name] = ren[s]

    def apply(k: Constraint) -> Constraint:
        return Constraint.make(
            [[{mapping[lab] for lab in g} for g in c] for c in k.configs],
            arity=k.arity)

    return Problem(f"renamed({p.name})", apply(p.white), apply(p.black))


# ---------------------------------------------------------------------------
# End-to-end verification


def _report_dict(r) -> dict:
    return {"ok": r.ok, "failures": r.failures, "stats": r.stats}


def _has_config_not_in(big: Constraint, small: Constraint,
                       cap: int) -> bool:
    for c in big.configs:
        for q in expand_condensed(c, cap):
            if not all(lab in small.labels() for lab in q) \
                    or not constraint_contains(small, q):
                return True
    return False


@dataclass
class SequenceCertificate:
    delta: int
    steps: list
    zero_round: Optional[object]
    start_containment: dict
    valid: bool

    def to_dict(self) -> dict:
        return {
            "v": 1,
            "delta": self.delta,
            "steps": self.steps,
            "zero_round": (None if self.zero_round is None
                           else {str(k): v for k, v in self.zero_round.items()}
                           if isinstance(self.zero_round, dict)
                           else list(self.zero_round)),
            "start_containment": self.start_containment,
            "valid": self.valid,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def verify_sequence(delta: int, method: str = "combination",
                    cap: int = DEFAULT_EXPANSION_CAP) -> SequenceCertificate:
    """Verify the whole hardness chain at degree delta.

    For each i: pi_prime(i) must relax re(pi(i)); the explicit second-step
    problem must relax rere(pi_prime(i)) and rename to exactly pi(i+1).
    Finally pi(delta-2) must not be 0-round solvable even with the coloring,
    and the chained-GHZ problem must sit strictly inside pi(0).
    """
    if delta < 3:
        raise ValueError("delta must be at least 3")
    steps = []
    valid = True
    for i in range(0, delta - 2):
        src = pi(i, delta)
        info = _build_pi_prime(i, delta)
        prime = info.problem
        step1 = check_relaxation_of_re(src, prime, method, cap)
        rel2 = strength_relation(prime, "white")
        second = _build_second_step(info, i, delta, rel2)
        step2 = check_relaxation_of_rere(prime, second, method, cap)
        renamed = rename_after_second_step(second, i, delta,
                                           _ctx=(info, rel2))
        nxt = pi(i + 1, delta)
        renaming_ok = (constraints_equal(renamed.white, nxt.white, cap=cap)
                       and constraints_equal(renamed.black, nxt.black,
                                             cap=cap))
        counts = {"pi": len(src.alphabet), "pi_prime": len(prime.alphabet)}
        bound_ok = all(n <= 12 * delta for n in counts.values())
        step_ok = step1.ok and step2.ok and renaming_ok and bound_ok
        steps.append({
            "i": i,
            "step1": _report_dict(step1),
            "step2": _report_dict(step2),
            "renaming_ok": renaming_ok,
            "label_counts": counts,
            "label_bound_ok": bound_ok,
            "ok": step_ok,
        })
        valid = valid and step_ok

    endpoint = pi(delta - 2, delta)
    witness = zero_round_solvable(endpoint, colored=True, cap=cap)
    valid = valid and witness is None

    ghz = iterated_ghz(delta)
    base = pi(0, delta)
    white_strict = (set(ghz.white.configs) <= set(base.white.configs)
                    and len(ghz.white.configs) < len(base.white.configs))
    black_contained = all(
        constraint_contains(base.black, [next(iter(g)) for g in c])
        for c in ghz.black.configs)
    black_strict = black_contained and _has_config_not_in(base.black,
                                                          ghz.black, cap)
    containment = {"white_strict_subset": white_strict,
                   "black_strict_subset": black_strict}
    valid = valid and white_strict and black_strict

    return SequenceCertificate(delta, steps, witness, containment, valid)
