"""Port-numbered synchronous network engine and the reference algorithms.

The engine runs node algorithms in lock-step rounds: messages placed in a
round-r outbox arrive in round r+1 inboxes.  All per-node randomness is
counter-based (derived by hashing seed, node id, round and a counter), so
runs are reproducible and independent of execution order.  The module also
contains the biregular colored instance generator, the LCL labeling
checker, and three algorithm pairs: the phase-by-phase chained-GHZ solver,
its one-communication-round variant backed by a shared non-signaling
resource, and the generic network-of-games solver.
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Optional, Sequence

from relim.core import Problem, constraint_contains
from relim.games import (
    Game,
    HalfGameCircuit,
    SequentialSampler,
    ghz_box,
    safe_pick,
)


# ---------------------------------------------------------------------------
# Networks


@dataclass(frozen=True)
class Node:
    nid: str
    role: str  # "white" | "black"
    degree: int
    inputs: Mapping


@dataclass
class PortNetwork:
    """Bipartite port-numbered network: nodes plus a connection involution
    over (node, port) pairs; per-edge input labels are shared by both
    endpoints."""

    nodes: dict  # nid -> Node
    conn: dict   # (nid, port) -> (nid, port)
    edge_inputs: dict = field(default_factory=dict)  # (nid, port) -> dict

    def __post_init__(self):
        for a, b in self.conn.items():
            if self.conn.get(b) != a:
                raise ValueError(f"connection not an involution at {a}")
            if self.nodes[a[0]].role == self.nodes[b[0]].role:
                raise ValueError(f"edge {a}-{b} does not cross roles")
        for n in self.nodes.values():
            for p in range(1, n.degree + 1):
                if (n.nid, p) not in self.conn:
                    raise ValueError(f"missing port {p} of node {n.nid}")

    def edges(self):
        seen = set()
        for a, b in self.conn.items():
            if b not in seen:
                seen.add(a)
                yield a, b

    def whites(self):
        return [n for n in self.nodes.values() if n.role == "white"]

    def blacks(self):
        return [n for n in self.nodes.values() if n.role == "black"]

    def to_json(self) -> str:
        return json.dumps({
            "v": 1,
            "nodes": [{"id": n.nid, "role": n.role, "degree": n.degree,
                       "inputs": dict(n.inputs)}
                      for n in sorted(self.nodes.values(),
                                      key=lambda n: n.nid)],
            "ports": [[a[0], a[1], b[0], b[1],
                       self.edge_inputs.get(a, {})]
                      for a, b in sorted(self.edges())],
        }, indent=2)

    @staticmethod
    def from_json(text: str) -> "PortNetwork":
        data = json.loads(text)
        nodes = {n["id"]: Node(n["id"], n["role"], n["degree"],
                               n.get("inputs", {}))
                 for n in data["nodes"]}
        conn, edge_inputs = {}, {}
        for entry in data["ports"]:
            a0, pa, b0, pb = entry[:4]
            ei = entry[4] if len(entry) > 4 else {}
            conn[(a0, pa)] = (b0, pb)
            conn[(b0, pb)] = (a0, pa)
            if ei:
                edge_inputs[(a0, pa)] = ei
                edge_inputs[(b0, pb)] = ei
        return PortNetwork(nodes, conn, edge_inputs)


def gen_colored_biregular(delta: int, n_white: int, seed) -> PortNetwork:
    """A (delta,3)-biregular colored instance: for each color, the white
    nodes are partitioned uniformly into triples, each triple meeting a
    fresh black node that carries the color; port numbers are random.
    Deterministic for a fixed seed."""
    if n_white % 3 != 0:
        raise ValueError("n_white must be divisible by 3")
    rng = random.Random(f"biregular|{seed}|{delta}|{n_white}")
    nodes = {}
    conn = {}
    edge_inputs = {}
    whites = [f"w{i}" for i in range(n_white)]
    # per white: a random assignment of colors to ports
    port_of_color = {}
    for w in whites:
        nodes[w] = Node(w, "white", delta, {})
        perm = list(range(1, delta + 1))
        rng.shuffle(perm)
        port_of_color[w] = {c: perm[c - 1] for c in range(1, delta + 1)}
    bi = 0
    for c in range(1, delta + 1):
        order = whites[:]
        rng.shuffle(order)
        for t in range(0, n_white, 3):
            b = f"b{bi}"
            bi += 1
            nodes[b] = Node(b, "black", 3, {"color": c})
            bports = [1, 2, 3]
            rng.shuffle(bports)
            for bp, w in zip(bports, order[t:t + 3]):
                wp = port_of_color[w][c]
                conn[(w, wp)] = (b, bp)
                conn[(b, bp)] = (w, wp)
                ei = {"color": c}
                edge_inputs[(w, wp)] = ei
                edge_inputs[(b, bp)] = ei
    return PortNetwork(nodes, conn, edge_inputs)


# ---------------------------------------------------------------------------
# Engine


def _rand_fraction(key: str) -> Fraction:
    h = hashlib.sha256(key.encode()).digest()
    return Fraction(int.from_bytes(h[:8], "big"), 2 ** 64)


class Ctx:
    """Per-node, per-round context handed to algorithm steps: counter-based
    randomness and access to shared non-signaling resources."""

    def __init__(self, engine: "_Engine", nid: str, rnd: int):
        self._engine = engine
        self._nid = nid
        self._rnd = rnd
        self._counter = 0

    def random(self) -> Fraction:
        self._counter += 1
        return _rand_fraction(
            f"{self._engine.seed}|{self._nid}|{self._rnd}|{self._counter}")

    def measure_ghz(self, rid: str, party: int, x: int) -> int:
        """Measure one party of the shared GHZ-box resource ``rid``."""
        res = self._engine.resources.get(rid)
        if res is None:
            res = self._engine.resources[rid] = SequentialSampler(ghz_box())
        self._engine.res_counter[rid] = self._engine.res_counter.get(rid, 0) + 1
        key = f"{self._engine.seed}|res|{rid}|{self._engine.res_counter[rid]}"
        return res.measure(party, x, lambda: _rand_fraction(key))


class NodeAlgorithm:
    """Base class: override ``init`` and ``step``.

    ``step`` returns (outbox, halt_output):
      * outbox: list of (port, payload) messages;
      * halt_output: None to keep running, or a dict port -> label ({} for
        nodes that produce no labels) to halt.
    """

    def init(self, view: "View") -> None:  # pragma: no cover - interface
        raise NotImplementedError

    def step(self, rnd: int, inbox: Mapping, ctx: Ctx):  # pragma: no cover
        raise NotImplementedError


@dataclass(frozen=True)
class View:
    role: str
    degree: int
    inputs: Mapping
    edge_inputs: Mapping  # port -> dict


@dataclass
class RunTrace:
    rounds: int                      # last round in which a message was sent
    iterations: int                  # engine iterations until quiescence
    messages_per_round: list         # counts, index 0 = round 1
    labeling: dict                   # (white id, port) -> label
    halt_round: dict                 # nid -> iteration of halting
    budget_exceeded: bool = False


class RunError(RuntimeError):
    pass


class _Engine:
    def __init__(self, net: PortNetwork, seed):
        self.net = net
        self.seed = seed
        self.resources = {}
        self.res_counter = {}


def run_sync(net: PortNetwork, algs: Mapping, max_rounds: int,
             seed) -> RunTrace:
    """Run one algorithm per node in synchronous lock-step."""
    engine = _Engine(net, seed)
    order = sorted(net.nodes)
    views = {}
    for nid in order:
        n = net.nodes[nid]
        views[nid] = View(n.role, n.degree, n.inputs,
                          {p: net.edge_inputs.get((nid, p), {})
                           for p in range(1, n.degree + 1)})
        algs[nid].init(views[nid])
    inboxes = {nid: {} for nid in order}
    halted = {}
    labeling = {}
    messages = []
    rnd = 0
    while len(halted) < len(order):
        rnd += 1
        if rnd > max_rounds:
            return RunTrace(
                rounds=len(messages) - _trailing_zeros(messages),
                iterations=rnd - 1, messages_per_round=messages,
                labeling=labeling, halt_round=halted, budget_exceeded=True)
        next_inboxes = {nid: {} for nid in order}
        count = 0
        for nid in order:
            if nid in halted:
                continue
            ctx = Ctx(engine, nid, rnd)
            outbox, halt_output = algs[nid].step(rnd, inboxes[nid], ctx)
            for port, payload in outbox or ():
                dest = net.conn.get((nid, port))
                if dest is None:
                    raise RunError(f"{nid} sent to nonexistent port {port}")
                next_inboxes[dest[0]].setdefault(dest[1], []).append(payload)
                count += 1
            if halt_output is not None:
                halted[nid] = rnd
                for port, label in halt_output.items():
                    key = (nid, port)
                    if key in labeling:
                        raise RunError(f"output conflict at {key}")
                    labeling[key] = label
        messages.append(count)
        inboxes = next_inboxes
    rounds = len(messages)
    while rounds > 0 and messages[rounds - 1] == 0:
        rounds -= 1
    return RunTrace(rounds=rounds, iterations=rnd,
                    messages_per_round=messages, labeling=labeling,
                    halt_round=halted)


def _trailing_zeros(messages):
    n = 0
    for c in reversed(messages):
        if c != 0:
            break
        n += 1
    return n


# ---------------------------------------------------------------------------
# LCL labeling checker


def check_labeling(p: Problem, net: PortNetwork, labeling: Mapping):
    """Check a white-edge labeling against both constraints of ``p``.

    Nodes whose degree differs from the relevant arity are unconstrained.
    Returns (ok, violations).
    """
    violations = []
    for n in net.nodes.values():
        arity = p.white.arity if n.role == "white" else p.black.arity
        if n.degree != arity:
            continue
        labs = []
        missing = False
        for port in range(1, n.degree + 1):
            if n.role == "white":
                key = (n.nid, port)
            else:
                key = net.conn[(n.nid, port)]
            lab = labeling.get(key)
            if lab is None:
                violations.append({"node": n.nid, "kind": "missing-label",
                                   "edge": key})
                missing = True
                break
            labs.append(lab)
        if missing:
            continue
        side = p.white if n.role == "white" else p.black
        if not constraint_contains(side, labs):
            violations.append({"node": n.nid, "kind": "bad-configuration",
                               "labels": labs})
    return not violations, violations


# ---------------------------------------------------------------------------
# Chained-GHZ algorithms

from relim.family import _my, _xy  # label constructors shared with the LCL
from relim.games import ghz_game

_GHZ_GAME = ghz_game()


class WhiteClassicalGhz(NodeAlgorithm):
    """Phase c: learn bit g_{c-1}, forward it to the color-c black node."""

    def init(self, view: View) -> None:
        self.view = view
        self.delta = view.degree
        self.port_of = {ei["color"]: p
                        for p, ei in view.edge_inputs.items()}
        self.g = {}

    def step(self, rnd, inbox, ctx):
        if rnd % 2 == 0:
            return [], None
        if rnd == 1:
            return [(self.port_of[1], "hello")], None
        # the color-c black node (acting at round 2c) just answered
        c = (rnd - 1) // 2
        self.g[c] = inbox[self.port_of[c]][0]
        if c == self.delta:
            labels = {self.port_of[1]: _my(1, self.g[1])}
            for j in range(2, self.delta + 1):
                labels[self.port_of[j]] = _xy(j, self.g[j - 1], self.g[j])
            return [], labels
        return [(self.port_of[c + 1], self.g[c])], None


class BlackClassicalGhz(NodeAlgorithm):
    """Color 1 elects its port-1 neighbor; other colors play one GHZ move
    with deterministically safe outputs, in port order."""

    def init(self, view: View) -> None:
        self.color = view.inputs["color"]

    def step(self, rnd, inbox, ctx):
        if rnd != 2 * self.color:
            return [], None
        if self.color == 1:
            return [(p, 1 if p == 1 else 0) for p in (1, 2, 3)], {}
        committed = []
        out = []
        for port in sorted(inbox):
            x = inbox[port][0]
            y = safe_pick(_GHZ_GAME, committed, (port, x))
            committed.append((port, x, y))
            out.append((port, y))
        return out, {}


def alg_classical_ghz(net: PortNetwork) -> dict:
    return {n.nid: (WhiteClassicalGhz() if n.role == "white"
                    else BlackClassicalGhz())
            for n in net.nodes.values()}


class WhiteQuantumGhz(NodeAlgorithm):
    """After one round of black-to-white messages, all bits are produced
    locally by measuring the shared per-black-node resources in ascending
    color order."""

    def init(self, view: View) -> None:
        self.view = view
        self.delta = view.degree
        self.port_of = {ei["color"]: p
                        for p, ei in view.edge_inputs.items()}

    def step(self, rnd, inbox, ctx):
        if rnd == 1:
            return [], None
        g = {}
        handles = {}
        for port, msgs in inbox.items():
            c, party, rid = msgs[0]
            handles[c] = (party, rid)
        g[1] = 1 if handles[1][0] == 2 else 0
        for k in range(2, self.delta + 1):
            party, rid = handles[k]
            g[k] = ctx.measure_ghz(rid, party, g[k - 1])
        labels = {self.port_of[1]: _my(1, g[1])}
        for j in range(2, self.delta + 1):
            labels[self.port_of[j]] = _xy(j, g[j - 1], g[j])
        return [], labels


class BlackQuantumGhz(NodeAlgorithm):
    """Round 1: announce color, party index and resource handle; stop."""

    def __init__(self, rid: str):
        self.rid = rid

    def init(self, view: View) -> None:
        self.color = view.inputs["color"]

    def step(self, rnd, inbox, ctx):
        out = [(p, (self.color, p, self.rid)) for p in (1, 2, 3)]
        return out, {}


def alg_quantum_sim_ghz(net: PortNetwork) -> dict:
    algs = {}
    for n in net.nodes.values():
        if n.role == "white":
            algs[n.nid] = WhiteQuantumGhz()
        else:
            algs[n.nid] = BlackQuantumGhz(rid=n.nid)
    return algs


# ---------------------------------------------------------------------------
# Network-of-games instances and the generic solver


@dataclass
class GamesInstance:
    """A (d, m)-regular network of games: each white node carries an input
    symbol, a circuit of half-games and a port permutation; each black node
    carries a game and a port-to-player permutation."""

    net: PortNetwork
    d: int
    m: int
    white_data: dict  # nid -> {"xi", "circuit", "sigma"}  sigma: game i -> port
    black_data: dict  # nid -> {"game", "sigma"}  sigma: port -> player

    def __post_init__(self):
        for n in self.net.whites():
            if n.degree != self.d:
                raise ValueError(f"white {n.nid} degree != d")
            sig = self.white_data[n.nid]["sigma"]
            if sorted(sig.values()) != list(range(1, self.d + 1)):
                raise ValueError(f"white {n.nid}: sigma not a permutation")
        for n in self.net.blacks():
            if n.degree != self.m:
                raise ValueError(f"black {n.nid} degree != m")
            sig = self.black_data[n.nid]["sigma"]
            if sorted(sig.values()) != list(range(1, self.m + 1)):
                raise ValueError(f"black {n.nid}: sigma not a permutation")


def gen_games_instance(d: int, games: Sequence[Game], n_white: int,
                       seed) -> GamesInstance:
    """Random (d, m)-regular instance over the given same-arity games, with
    random circuits, inputs and permutations.  Deterministic per seed."""
    from relim.games import random_circuit
    ms = {g.m for g in games}
    if len(ms) != 1:
        raise ValueError("all games in one instance must share the player "
                         "count")
    m = ms.pop()
    if (n_white * d) % m != 0:
        raise ValueError("n_white * d must be divisible by m")
    rng = random.Random(f"games|{seed}|{d}|{n_white}")
    n_black = n_white * d // m
    nodes = {}
    conn = {}
    whites = [f"w{i}" for i in range(n_white)]
    blacks = [f"b{i}" for i in range(n_black)]
    for w in whites:
        nodes[w] = Node(w, "white", d, {})
    for b in blacks:
        nodes[b] = Node(b, "black", m, {})
    wslots = [(w, p) for w in whites for p in range(1, d + 1)]
    bslots = [(b, p) for b in blacks for p in range(1, m + 1)]
    rng.shuffle(wslots)
    rng.shuffle(bslots)
    for a, b in zip(wslots, bslots):
        conn[a] = b
        conn[b] = a
    net = PortNetwork(nodes, conn)
    alphabet = games[0].alphabet
    white_data = {}
    for w in whites:
        perm = list(range(1, d + 1))
        rng.shuffle(perm)
        white_data[w] = {
            "xi": rng.choice(alphabet),
            "circuit": random_circuit(d, rng, alphabet),
            "sigma": {i: perm[i - 1] for i in range(1, d + 1)},
        }
    black_data = {}
    for b in blacks:
        perm = list(range(1, m + 1))
        rng.shuffle(perm)
        black_data[b] = {
            "game": rng.choice(list(games)),
            "sigma": {p: perm[p - 1] for p in range(1, m + 1)},
        }
    return GamesInstance(net, d, m, white_data, black_data)


def ghz_as_games_instance(delta: int, n_white: int, seed) -> GamesInstance:
    """The chained-GHZ instance expressed as a network of games: linear
    chain circuits, the symmetry-breaking game at color 1 and the GHZ game
    elsewhere, with the game order given by the edge coloring."""
    from relim.games import chain_circuit, symm_game
    net = gen_colored_biregular(delta, n_white, seed)
    symm, ghz = symm_game(), ghz_game()
    white_data = {}
    for n in net.whites():
        sigma = {}
        for p in range(1, n.degree + 1):
            sigma[net.edge_inputs[(n.nid, p)]["color"]] = p
        white_data[n.nid] = {"xi": 0, "circuit": chain_circuit(delta),
                             "sigma": sigma}
    black_data = {}
    for n in net.blacks():
        black_data[n.nid] = {
            "game": symm if n.inputs["color"] == 1 else ghz,
            "sigma": {p: p for p in range(1, 4)},
        }
    return GamesInstance(net, delta, 3, white_data, black_data)


class WhiteGamesNet(NodeAlgorithm):
    def init(self, view: View) -> None:
        self.view = view

    def configure(self, data, d):
        self.xi = data["xi"]
        self.circuit = data["circuit"]
        self.sigma = data["sigma"]
        self.d = d
        self.y = []
        self.x = []

    def step(self, rnd, inbox, ctx):
        if rnd % 2 == 1:
            i = (rnd + 1) // 2
            if i > 1:
                port = self.sigma[i - 1]
                self.y.append(inbox[port][0])
            if i > self.d:
                labels = {self.sigma[j]: (self.x[j - 1], self.y[j - 1])
                          for j in range(1, self.d + 1)}
                return [], labels
            xs = self.circuit.eval_prefix(i, self.xi, tuple(self.y))
            self.x.append(xs[-1])
            return [(self.sigma[i], xs[-1])], None
        return [], None


class BlackGamesNet(NodeAlgorithm):
    def init(self, view: View) -> None:
        self.view = view

    def configure(self, data, m):
        self.game = data["game"]
        self.sigma = data["sigma"]
        self.m = m
        self.committed = []

    def step(self, rnd, inbox, ctx):
        out = []
        for port in sorted(inbox):
            x = inbox[port][0]
            player = self.sigma[port]
            y = safe_pick(self.game, self.committed, (player, x))
            self.committed.append((player, x, y))
            out.append((port, y))
        halt = {} if len(self.committed) == self.m else None
        return out, halt


def alg_games_net(inst: GamesInstance) -> dict:
    algs = {}
    for n in inst.net.whites():
        a = WhiteGamesNet()
        a.configure(inst.white_data[n.nid], inst.d)
        algs[n.nid] = a
    for n in inst.net.blacks():
        a = BlackGamesNet()
        a.configure(inst.black_data[n.nid], inst.m)
        algs[n.nid] = a
    return algs


def simulate_batch(kind: str, delta: int, n_white: int, seed,
                   trials: int = 1) -> dict:
    """Run and check ``trials`` seeded instances of one algorithm family.

    ``kind``: "classical-ghz" | "quantum-ghz" | "games-net" (for games-net,
    ``delta`` is the per-white half-game count d).  Returns a summary dict
    with per-trial round counts and the first failure, if any.
    """
    from relim.family import iterated_ghz
    from relim.games import chsh_game, ghz_game, symm_game
    passes = 0
    rounds = []
    first_failure = None
    sample = None
    for t in range(trials):
        s = f"{seed}+{t}"
        if kind == "games-net":
            rng = random.Random(f"batch|{s}")
            if rng.random() < 0.5:
                games = [symm_game(), ghz_game()]
            else:
                games = [chsh_game()]
            m = games[0].m
            nw = n_white + (-n_white) % m
            inst = gen_games_instance(delta, games, nw, s)
            trace = run_sync(inst.net, alg_games_net(inst),
                             2 * delta + 3, s)
            ok, violations = check_games_labeling(inst, trace.labeling)
            ok = ok and trace.rounds == 2 * delta
        else:
            nw = n_white + (-n_white) % 3
            net = gen_colored_biregular(delta, nw, s)
            if kind == "classical-ghz":
                algs = alg_classical_ghz(net)
            elif kind == "quantum-ghz":
                algs = alg_quantum_sim_ghz(net)
            else:
                raise ValueError(f"unknown simulation kind {kind!r}")
            trace = run_sync(net, algs, 2 * delta + 3, s)
            ok, violations = check_labeling(iterated_ghz(delta), net,
                                            trace.labeling)
            if kind == "classical-ghz":
                ok = ok and trace.rounds <= 2 * delta
            else:
                ok = ok and all(c == 0
                                for c in trace.messages_per_round[1:])
        rounds.append(trace.rounds)
        if ok:
            passes += 1
        elif first_failure is None:
            first_failure = {"trial": t, "seed": s,
                             "violations": violations[:3],
                             "rounds": trace.rounds}
        if sample is None:
            sample = {f"{nid}:{port}": lab
                      for (nid, port), lab in sorted(trace.labeling.items())}
    return {"v": 1, "kind": kind, "delta": delta, "n_white": n_white,
            "trials": trials, "passes": passes,
            "rounds_min": min(rounds), "rounds_max": max(rounds),
            "first_failure": first_failure, "labeling_sample": sample}


def check_games_labeling(inst: GamesInstance, labeling: Mapping):
    """Check a per-white-port (x, y) labeling against the circuit and game
    constraints.  Returns (ok, violations)."""
    violations = []
    for n in inst.net.whites():
        data = inst.white_data[n.nid]
        sigma, circuit, xi = data["sigma"], data["circuit"], data["xi"]
        pairs = {}
        ok = True
        for i in range(1, inst.d + 1):
            lab = labeling.get((n.nid, sigma[i]))
            if lab is None:
                violations.append({"node": n.nid, "kind": "missing-label",
                                   "port": sigma[i]})
                ok = False
                break
            pairs[i] = lab
        if not ok:
            continue
        ys = tuple(pairs[i][1] for i in range(1, inst.d + 1))
        for i in range(1, inst.d + 1):
            want = circuit.eval_prefix(i, xi, ys[:i - 1])[-1]
            if pairs[i][0] != want:
                violations.append({"node": n.nid, "kind": "circuit-mismatch",
                                   "game": i, "got": pairs[i][0],
                                   "want": want})
    for n in inst.net.blacks():
        data = inst.black_data[n.nid]
        x = [None] * inst.m
        y = [None] * inst.m
        ok = True
        for port in range(1, inst.m + 1):
            lab = labeling.get(inst.net.conn[(n.nid, port)])
            if lab is None:
                violations.append({"node": n.nid, "kind": "missing-label",
                                   "port": port})
                ok = False
                break
            player = data["sigma"][port]
            x[player - 1], y[player - 1] = lab
        if ok and not data["game"].contains(tuple(x), tuple(y)):
            violations.append({"node": n.nid, "kind": "game-violated",
                               "x": x, "y": y})
    return not violations, violations
