"""End-to-end acceptance checks.

Each test covers one gating criterion and prints a single PASS/FAIL line
(run with ``pytest tests/test_acceptance.py -v -s`` to see them).
"""

import random
import time

import pytest

from fixtures_appendix import (
    FIRST_STEP_COLOR1,
    FIRST_STEP_GONE,
    FIRST_STEP_PRESENT,
    FIRST_STEP_SPECIAL,
    SECOND_STEP_COLOR1,
    SECOND_STEP_GONE,
    SECOND_STEP_PRESENT,
    SECOND_STEP_SPECIAL,
    base_label,
)
from relim.core import Constraint, constraint_contains
from relim.family import (
    bit_configs,
    iterated_ghz,
    maximized_bit_configs,
    pi,
    pi_prime,
    verify_sequence,
)
from relim.games import (
    chsh_game,
    copy_game,
    ghz_game,
    is_strongly_completable,
    max_deterministic_wins,
    symm_game,
)
from relim.netsim import (
    alg_classical_ghz,
    alg_games_net,
    alg_quantum_sim_ghz,
    check_games_labeling,
    check_labeling,
    gen_colored_biregular,
    gen_games_instance,
    run_sync,
)
from relim.rounds import (
    maximize_universal,
    re,
    rere,
    strength_relation,
    zero_round_solvable,
)


def _report(name, ok, detail=""):
    line = f"{'PASS' if ok else 'FAIL'}: {name}"
    if detail:
        line += f" ({detail})"
    print(line, flush=True)
    assert ok, line


def test_maximization_oracle_equality():
    t0 = time.monotonic()
    k = Constraint.make(bit_configs(2))
    expected = set(Constraint.make(maximized_bit_configs(2)).configs)
    a = set(maximize_universal(k, method="combination"))
    b = set(maximize_universal(k, method="direct"))
    dt = time.monotonic() - t0
    _report("maximization oracle: 15 bit configurations -> the frozen 22, "
            "both methods",
            len(k.configs) == 15 and len(expected) == 22
            and a == expected and b == expected and dt < 5.0,
            f"{dt:.2f}s")


@pytest.mark.parametrize("delta,budget", [(3, 10.0), (4, 60.0), (5, 600.0)])
def test_sequence_certificate(delta, budget):
    t0 = time.monotonic()
    cert = verify_sequence(delta)
    unsolv = zero_round_solvable(pi(delta - 2, delta), colored=True) is None
    dt = time.monotonic() - t0
    steps_ok = (len(cert.steps) == delta - 2
                and all(s["ok"] and s["step1"]["ok"] and s["step2"]["ok"]
                        and s["renaming_ok"] for s in cert.steps))
    start_ok = (cert.start_containment["white_strict_subset"]
                and cert.start_containment["black_strict_subset"])
    _report(f"sequence certificate valid at delta={delta} "
            "(relaxation steps, renaming, strict start containment, "
            "zero-round unsolvable endpoint)",
            cert.valid and steps_ok and start_ok and unsolv and dt < budget,
            f"{dt:.1f}s < {budget:.0f}s")


def test_sequence_certificate_delta6_stretch():
    # reported, not gating
    t0 = time.monotonic()
    try:
        cert = verify_sequence(6)
        ok = cert.valid
    except Exception as exc:  # noqa: BLE001 - stretch goal, report only
        print(f"INFO: delta=6 certificate errored: {exc!r}", flush=True)
        return
    print(f"{'PASS' if ok else 'FAIL'} (non-gating): delta=6 certificate "
          f"({time.monotonic() - t0:.1f}s)", flush=True)


def test_per_color_lists_already_maximal_at_delta6():
    t0 = time.monotonic()
    bad = []
    for i in range(5):
        p = pi(i, 6)
        by_color = {}
        for c in p.black.configs:
            col = next(iter({lab.rsplit("_", 1)[1] for g in c for lab in g}))
            by_color.setdefault(col, []).append(c)
        for col, cfgs in by_color.items():
            k = Constraint.make(cfgs)
            if set(maximize_universal(k)) != set(k.configs):
                bad.append((i, col))
    _report("per-color condensed lists at delta=6 are fixed points of the "
            "maximization (exact set equality)",
            not bad, f"{time.monotonic() - t0:.1f}s, mismatches={bad}")


def test_right_closedness():
    t0 = time.monotonic()
    violations = 0
    for delta in (3, 4, 5):
        for i in range(delta - 1):
            p = pi(i, delta)
            rel = strength_relation(p, "black")
            for members in re(p).sets.values():
                if rel.gen(members) != members:
                    violations += 1
            if i <= delta - 3:
                pp = pi_prime(i, delta)
                relw = strength_relation(pp, "white")
                for members in rere(pp).sets.values():
                    if relw.gen(members) != members:
                        violations += 1
    _report("right-closedness of re/rere output labels for delta <= 5",
            violations == 0,
            f"{violations} violations, {time.monotonic() - t0:.1f}s")


def test_appendix_fixtures():
    t0 = time.monotonic()
    claims = witnesses = failures = 0
    for delta, i in ((5, 1), (6, 2)):
        src, prime = pi(i, delta), pi_prime(i, delta)
        rel_black = strength_relation(src, "black")
        rel_white = strength_relation(prime, "white")
        name_of = {m: n for n, m in prime.sets.items()}

        def resolve(tokens, j):
            return name_of[rel_black.gen([base_label(t, j) for t in tokens])]

        special = delta - i
        gone = range(special + 1, delta + 1)
        first = ([(j, e) for j in gone for e in FIRST_STEP_GONE]
                 + [(1, e) for e in FIRST_STEP_COLOR1]
                 + [(j, e) for j in range(2, special)
                    for e in FIRST_STEP_PRESENT]
                 + [(special, e) for e in FIRST_STEP_SPECIAL])
        for j, (a, b, allowed, forbidden) in first:
            claims += 1
            if rel_black.leq(base_label(a, j), base_label(b, j)):
                failures += 1
            if allowed is not None:
                witnesses += 1
                ca = [base_label(t, j) for t in allowed]
                cf = [base_label(t, j) for t in forbidden]
                if not constraint_contains(src.black, ca):
                    failures += 1
                if constraint_contains(src.black, cf):
                    failures += 1

        def base_cfg(l1, mids_bits, spec):
            cfg = [None] * delta
            cfg[0] = resolve((f"MY{l1}",), 1)
            for k in range(2, special):
                bit = mids_bits[k]
                cfg[k - 1] = resolve((f"X{bit}{bit}",), k)
            cfg[special - 1] = resolve((f"X{spec}0", f"X{spec}1"), special)
            for k in gone:
                cfg[k - 1] = resolve(("Q",), k)
            return cfg

        def check_witness(cfg, pos, an, bn):
            nonlocal failures, witnesses
            witnesses += 1
            swapped = list(cfg)
            swapped[pos] = bn
            if not (cfg[pos] == an
                    and constraint_contains(prime.white, cfg)
                    and not constraint_contains(prime.white, swapped)):
                failures += 1

        for j in gone:
            for a, b, _ in SECOND_STEP_GONE:
                claims += 1
                an, bn = resolve(a, j), resolve(b, j)
                if rel_white.leq(an, bn):
                    failures += 1
                cfg = [resolve(("MM",), k) for k in range(1, special)]
                cfg.append(resolve(("X00", "X01"), special))
                cfg.extend(resolve(("Q",), k) if k != j else an for k in gone)
                check_witness(cfg, j - 1, an, bn)
        for a, b, tpl in SECOND_STEP_COLOR1:
            claims += 1
            an, bn = resolve(a, 1), resolve(b, 1)
            if rel_white.leq(an, bn):
                failures += 1
            if tpl is not None:
                _, mid, _, _, spec = tpl
                cfg = base_cfg(0, {k: mid for k in range(2, special)}, spec)
                cfg[0] = an
                check_witness(cfg, 0, an, bn)
        for j in range(2, special):
            for a, b, tpl in SECOND_STEP_PRESENT:
                claims += 1
                an, bn = resolve(a, j), resolve(b, j)
                if rel_white.leq(an, bn):
                    failures += 1
                if tpl is not None:
                    l1, pre, _, post, spec = tpl
                    mids = {k: (pre if k < j else post)
                            for k in range(2, special)}
                    cfg = base_cfg(l1, mids, spec)
                    cfg[j - 1] = an
                    check_witness(cfg, j - 1, an, bn)
        for a, b, tpl in SECOND_STEP_SPECIAL:
            claims += 1
            an, bn = resolve(a, special), resolve(b, special)
            if rel_white.leq(an, bn):
                failures += 1
            l1, mid = tpl
            cfg = base_cfg(l1, {k: mid for k in range(2, special)}, 0)
            cfg[special - 1] = an
            check_witness(cfg, special - 1, an, bn)
    _report("appendix non-relation fixtures at (5,1) and (6,2): 100% hold",
            failures == 0,
            f"{claims} claims, {witnesses} witnesses, {failures} failures, "
            f"{time.monotonic() - t0:.1f}s")


def _instance_sizes(rng, count):
    # small-biased instance sizes with occasional large ones, <= 300 whites
    for _ in range(count):
        n = rng.choice((3, 6, 9, 12, 24)) if rng.random() < 0.95 \
            else rng.choice((150, 300))
        yield n


@pytest.mark.parametrize("delta", [3, 4, 5, 6, 7, 8])
def test_simulator_validity(delta):
    t0 = time.monotonic()
    problem = iterated_ghz(delta)
    rng = random.Random(f"acceptance-sim|{delta}")
    trials = 1000
    bad = 0
    for t, n in enumerate(_instance_sizes(rng, trials)):
        seed = f"acc|{delta}|{t}"
        net = gen_colored_biregular(delta, n, seed)
        tr = run_sync(net, alg_classical_ghz(net), 2 * delta + 3, seed)
        ok_c, _ = check_labeling(problem, net, tr.labeling)
        if not (ok_c and tr.rounds <= 2 * delta):
            bad += 1
        tr = run_sync(net, alg_quantum_sim_ghz(net), 2 * delta + 3, seed)
        ok_q, _ = check_labeling(problem, net, tr.labeling)
        if not (ok_q and all(c == 0 for c in tr.messages_per_round[1:])):
            bad += 1
    dt = time.monotonic() - t0
    _report(f"simulators at delta={delta}: {trials} instances each, "
            "classical <= 2*delta rounds, quantum communicates only in "
            "round 1, all labelings valid",
            bad == 0 and dt < 120.0, f"{bad} failures, {dt:.1f}s < 120s")


def test_games_net_correctness():
    t0 = time.monotonic()
    rng = random.Random("acceptance-games")
    bad = 0
    trials = 500
    for t in range(trials):
        d = rng.randint(1, 6)
        games = [symm_game(), ghz_game()] if rng.random() < 0.5 \
            else [chsh_game()]
        m = games[0].m
        n = m * rng.randint(1, 6)
        seed = f"acc-games|{t}"
        inst = gen_games_instance(d, games, n, seed)
        tr = run_sync(inst.net, alg_games_net(inst), 2 * d + 3, seed)
        ok, _ = check_games_labeling(inst, tr.labeling)
        if not (ok and tr.rounds == 2 * d):
            bad += 1
    _report("network-of-games solver: 500 random instances (d <= 6, "
            "SYMM/GHZ/CHSH), halts in exactly 2d rounds, all labelings "
            "valid",
            bad == 0, f"{bad} failures, {time.monotonic() - t0:.1f}s")


def test_classical_game_bounds():
    t0 = time.monotonic()
    chsh = max_deterministic_wins(chsh_game())
    g = ghz_game()
    promise = [x for x in g.inputs() if sum(x) % 2 == 0]
    ghz = max_deterministic_wins(g, inputs=promise)
    dt = time.monotonic() - t0
    _report("deterministic bounds: CHSH wins 3/4 inputs, GHZ-with-promise "
            "wins 3/4 promise inputs",
            chsh == (3, 4) and ghz == (3, 4) and dt < 1.0,
            f"chsh={chsh}, ghz={ghz}, {dt:.2f}s")


def test_strong_completability():
    t0 = time.monotonic()
    ghz_ok = is_strongly_completable(ghz_game()).ok
    symm_ok = is_strongly_completable(symm_game()).ok
    rep = is_strongly_completable(copy_game())
    dt = time.monotonic() - t0
    _report("strong completability: GHZ and SYMM complete, copy game fails "
            "with order (1,2)",
            ghz_ok and symm_ok and not rep.ok
            and rep.failing_order == (1, 2) and dt < 1.0,
            f"{dt:.2f}s")
