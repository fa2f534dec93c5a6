import pytest

from relim.family import iterated_ghz
from relim.games import chsh_game, ghz_game, symm_game
from relim.netsim import (
    GamesInstance,
    Node,
    PortNetwork,
    alg_classical_ghz,
    alg_games_net,
    alg_quantum_sim_ghz,
    check_games_labeling,
    check_labeling,
    gen_colored_biregular,
    gen_games_instance,
    ghz_as_games_instance,
    run_sync,
    simulate_batch,
)


# ---------------------------------------------------------------------------
# Networks


def _tiny_net():
    nodes = {"w": Node("w", "white", 1, {}), "b": Node("b", "black", 1, {})}
    conn = {("w", 1): ("b", 1), ("b", 1): ("w", 1)}
    return PortNetwork(nodes, conn)


def test_network_validation():
    nodes = {"w": Node("w", "white", 1, {}), "b": Node("b", "black", 1, {})}
    with pytest.raises(ValueError):  # not an involution
        PortNetwork(dict(nodes), {("w", 1): ("b", 1), ("b", 1): ("b", 1)})
    nodes2 = {"w": Node("w", "white", 1, {}), "v": Node("v", "white", 1, {})}
    with pytest.raises(ValueError):  # edge inside one role class
        PortNetwork(nodes2, {("w", 1): ("v", 1), ("v", 1): ("w", 1)})
    nodes3 = {"w": Node("w", "white", 2, {}), "b": Node("b", "black", 1, {})}
    with pytest.raises(ValueError):  # white port 2 unwired
        PortNetwork(nodes3, {("w", 1): ("b", 1), ("b", 1): ("w", 1)})


def test_network_json_roundtrip():
    net = gen_colored_biregular(3, 6, "rt")
    back = PortNetwork.from_json(net.to_json())
    assert back.nodes == net.nodes
    assert back.conn == net.conn
    assert back.edge_inputs == net.edge_inputs


def test_generator_shape_and_determinism():
    net = gen_colored_biregular(4, 9, 7)
    assert len(net.whites()) == 9
    assert len(net.blacks()) == 4 * 9 // 3
    for n in net.whites():
        assert n.degree == 4
        colors = {net.edge_inputs[(n.nid, p)]["color"] for p in range(1, 5)}
        assert colors == {1, 2, 3, 4}
    for n in net.blacks():
        for p in range(1, 4):
            assert net.edge_inputs[(n.nid, p)]["color"] == n.inputs["color"]
    again = gen_colored_biregular(4, 9, 7)
    assert again.to_json() == net.to_json()
    assert gen_colored_biregular(4, 9, 8).to_json() != net.to_json()


def test_generator_rejects_bad_size():
    with pytest.raises(ValueError):
        gen_colored_biregular(3, 7, 0)


# ---------------------------------------------------------------------------
# Synchronous engine + checker on the chained-GHZ algorithms


@pytest.mark.parametrize("delta", [3, 4])
def test_classical_ghz_runs_in_two_delta_rounds(delta):
    net = gen_colored_biregular(delta, 9, f"cl{delta}")
    trace = run_sync(net, alg_classical_ghz(net), 2 * delta + 3, "s")
    assert not trace.budget_exceeded
    assert trace.rounds == 2 * delta
    ok, violations = check_labeling(iterated_ghz(delta), net, trace.labeling)
    assert ok, violations
    # every white edge is labeled
    assert len(trace.labeling) == delta * 9


def test_run_is_deterministic():
    net = gen_colored_biregular(3, 6, "det")
    t1 = run_sync(net, alg_classical_ghz(net), 9, "s")
    t2 = run_sync(net, alg_classical_ghz(net), 9, "s")
    assert t1.labeling == t2.labeling
    assert t1.messages_per_round == t2.messages_per_round


def test_budget_exceeded_reported():
    net = gen_colored_biregular(3, 6, "bud")
    trace = run_sync(net, alg_classical_ghz(net), 2, "s")
    assert trace.budget_exceeded


@pytest.mark.parametrize("delta", [3, 5])
def test_quantum_ghz_single_communication_round(delta):
    net = gen_colored_biregular(delta, 9, f"q{delta}")
    trace = run_sync(net, alg_quantum_sim_ghz(net), 2 * delta + 3, "s")
    assert trace.rounds == 1
    assert all(c == 0 for c in trace.messages_per_round[1:])
    ok, violations = check_labeling(iterated_ghz(delta), net, trace.labeling)
    assert ok, violations


def test_checker_flags_corruption():
    delta = 3
    net = gen_colored_biregular(delta, 6, "cor")
    trace = run_sync(net, alg_classical_ghz(net), 9, "s")
    bad = dict(trace.labeling)
    key = sorted(bad)[0]
    bad[key] = "MY0_1" if bad[key] != "MY0_1" else "MY1_1"
    ok, violations = check_labeling(iterated_ghz(delta), net, bad)
    assert not ok and violations
    missing = dict(trace.labeling)
    del missing[key]
    ok, violations = check_labeling(iterated_ghz(delta), net, missing)
    assert not ok
    assert any(v["kind"] == "missing-label" for v in violations)


# ---------------------------------------------------------------------------
# Networks of games


def test_games_instance_validation():
    inst = gen_games_instance(2, [chsh_game()], 4, 0)
    bad_white = {k: dict(v) for k, v in inst.white_data.items()}
    first = sorted(bad_white)[0]
    bad_white[first] = dict(bad_white[first], sigma={1: 1, 2: 1})
    with pytest.raises(ValueError):
        GamesInstance(inst.net, inst.d, inst.m, bad_white, inst.black_data)


@pytest.mark.parametrize("d,games", [
    (1, [chsh_game()]),
    (2, [chsh_game()]),
    (3, [symm_game(), ghz_game()]),
])
def test_games_net_halts_in_exactly_two_d_rounds(d, games):
    m = games[0].m
    n_white = 2 * m
    inst = gen_games_instance(d, games, n_white, f"g{d}")
    trace = run_sync(inst.net, alg_games_net(inst), 2 * d + 3, "s")
    assert trace.rounds == 2 * d
    ok, violations = check_games_labeling(inst, trace.labeling)
    assert ok, violations


def test_chained_ghz_expressed_as_games():
    inst = ghz_as_games_instance(3, 6, "as-games")
    trace = run_sync(inst.net, alg_games_net(inst), 9, "s")
    assert trace.rounds == 6
    ok, violations = check_games_labeling(inst, trace.labeling)
    assert ok, violations


def test_games_checker_flags_corruption():
    inst = gen_games_instance(2, [chsh_game()], 4, "gc")
    trace = run_sync(inst.net, alg_games_net(inst), 7, "s")
    bad = dict(trace.labeling)
    key = sorted(bad)[0]
    x, y = bad[key]
    bad[key] = (1 - x, y)
    ok, violations = check_games_labeling(inst, bad)
    assert not ok and violations


# ---------------------------------------------------------------------------
# Batch driver


@pytest.mark.parametrize("kind,rounds_key", [
    ("classical-ghz", 6),
    ("quantum-ghz", 1),
    ("games-net", 6),
])
def test_simulate_batch(kind, rounds_key):
    out = simulate_batch(kind, 3, 6, "batch", trials=3)
    assert out["v"] == 1 and out["kind"] == kind
    assert out["passes"] == 3
    assert out["first_failure"] is None
    assert out["rounds_min"] == out["rounds_max"] == rounds_key
    assert out["labeling_sample"]


def test_simulate_batch_rejects_unknown_kind():
    with pytest.raises(ValueError):
        simulate_batch("nope", 3, 6, 0)
