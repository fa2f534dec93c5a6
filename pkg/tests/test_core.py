import pytest
from hypothesis import given, strategies as st

from relim.core import (
    ArityError,
    Constraint,
    ParseError,
    Problem,
    canon_condensed,
    color_of,
    constraint_contains,
    dominates_config,
    expand_condensed,
    expansion_size,
    parse_problem,
    pick_check,
    serialize_problem,
)


def cc(*groups):
    return canon_condensed([g if isinstance(g, (list, tuple, set)) else [g]
                            for g in groups])


def test_color_of():
    assert color_of("MY0_1") == 1
    assert color_of("S12_10") == 10
    assert color_of("A") is None
    assert color_of("X_y") is None


def test_pick_check_bijection():
    # [A,B] [A] admits A B and B A but not B B
    c = cc(["A", "B"], ["A"])
    assert pick_check(c, ("A", "B"))
    assert pick_check(c, ("B", "A"))
    assert not pick_check(c, ("B", "B"))
    assert pick_check(c, ("A", "A"))


def test_pick_check_needs_distinct_groups():
    # two groups both {A,B} plus one {C}: picking C twice impossible
    c = cc(["A", "B"], ["A", "B"], ["C"])
    assert pick_check(c, ("A", "B", "C"))
    assert not pick_check(c, ("C", "C", "A"))


def test_constraint_contains_multiset():
    k = Constraint.make([cc("A", "A", "B")])
    assert constraint_contains(k, ["A", "B", "A"])
    assert constraint_contains(k, ("B", "A", "A"))
    assert not constraint_contains(k, ["A", "A", "A"])


def test_dominates_config_setwise():
    small = cc(["A"], ["B"])
    big = cc(["A", "C"], ["B"])
    assert dominates_config(big, small)
    assert not dominates_config(small, big)


def test_expansion():
    c = cc(["A", "B"], ["C", "D"])
    assert expansion_size(c) == 4
    assert len(set(expand_condensed(c))) == 4


def test_parse_serialize_roundtrip():
    text = """\
problem demo
white
A_1 [B_2,C_2]
black
A_1 A_1 A_1
[B_2,C_2]^3
"""
    p = parse_problem(text)
    assert p.name == "demo"
    assert p.white.arity == 2
    assert p.black.arity == 3
    q = parse_problem(serialize_problem(p))
    assert q == p


def test_parse_comments_and_errors():
    assert parse_problem(
        "problem x\nwhite\nA A  # trailing\nblack\nA A A\n").white.arity == 2
    # the name header is optional
    assert parse_problem("white\nA\nblack\nA").name == ""
    with pytest.raises(ParseError):
        parse_problem("A B\nwhite\nA\nblack\nA")
    with pytest.raises(ParseError):
        parse_problem("problem x\nwhite\nA [B\nblack\nA A A\n")
    with pytest.raises(ParseError):
        parse_problem("problem x\nwhite\nA\nA B\nblack\nA A A\n")


def test_arity_cap():
    with pytest.raises(ArityError):
        Constraint.make([cc(*(["A"] * 17))])


labels = st.sampled_from(["A", "B", "C", "D"])
configs = st.lists(st.lists(st.lists(labels, min_size=1, max_size=3),
                            min_size=2, max_size=2),
                   min_size=1, max_size=6)


@given(configs)
def test_contains_iff_some_picking(cfgs):
    k = Constraint.make([canon_condensed(c) for c in cfgs])
    for c in k.configs:
        for q in expand_condensed(c):
            assert constraint_contains(k, q)


@given(st.lists(st.lists(labels, min_size=1, max_size=3),
                min_size=3, max_size=3),
       st.lists(labels, min_size=3, max_size=3))
def test_pick_check_matches_bruteforce(groups, q):
    from itertools import permutations, product
    c = canon_condensed(groups)
    want = any(tuple(sorted(pick)) == tuple(sorted(q))
               for pick in product(*c))
    # brute force over assignments of q's entries to groups
    brute = any(all(q[k] in c[perm[k]] for k in range(3))
                for perm in permutations(range(3)))
    assert pick_check(c, tuple(q)) == brute
    if want:
        assert brute


def test_set_annotations_roundtrip():
    from relim.rounds import re as re_op
    from relim.family import pi
    q = re_op(pi(0, 3))
    back = parse_problem(serialize_problem(q))
    assert back.sets == dict(q.sets)
    assert back == q
    with pytest.raises(ParseError):
        parse_problem("# set broken\nwhite\nA\nblack\nA\n")


def test_problem_alphabet_and_name():
    p = parse_problem("problem t\nwhite\nA B\nblack\nA A B\n")
    assert p.alphabet == ("A", "B")
    assert p.with_name("z").name == "z"
