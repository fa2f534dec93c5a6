"""Finite multiplayer games over a common alphabet.

Provides the game relation type, exact-rational strategies with
non-signaling verification, the strong-completability decision procedure
(an alternating for-all/exists search over play orders), the deterministic
safe output picker used by network players, the sequential conditional
sampler that realizes a verified strategy one player at a time, and
circuits of half-games with prefix evaluation.
"""

from __future__ import annotations

import re as _re
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations, product
from typing import Callable, Iterable, Mapping, Optional, Sequence

Word = tuple  # tuple of symbols


class GameFormatError(ValueError):
    pass


class CompletabilityError(RuntimeError):
    """No safe output exists for the requested move."""


def _word(symbols: Iterable) -> Word:
    return tuple(symbols)


@dataclass(frozen=True)
class Game:
    """An m-player one-move game: a relation between input and output words."""

    name: str
    alphabet: tuple
    m: int
    relation: frozenset  # frozenset[(Word, Word)]

    @staticmethod
    def make(name: str, alphabet: Iterable, m: int,
             moves: Iterable) -> "Game":
        alphabet = tuple(alphabet)
        rel = set()
        for x, y in moves:
            x, y = _word(x), _word(y)
            if len(x) != m or len(y) != m:
                raise GameFormatError(
                    f"move {(x, y)!r} does not have {m} symbols per side")
            for s in x + y:
                if s not in alphabet:
                    raise GameFormatError(f"symbol {s!r} not in alphabet")
            rel.add((x, y))
        return Game(name, alphabet, m, frozenset(rel))

    def outputs(self, x: Word) -> frozenset:
        x = _word(x)
        return frozenset(y for (xx, y) in self.relation if xx == x)

    def contains(self, x: Word, y: Word) -> bool:
        return (_word(x), _word(y)) in self.relation

    def inputs(self):
        return product(self.alphabet, repeat=self.m)


def is_solvable(g: Game) -> bool:
    """Every input word admits at least one output word."""
    return all(g.outputs(x) for x in g.inputs())


# ---------------------------------------------------------------------------
# Canonical games


def ghz_game() -> Game:
    """Three players; when the input bits have even sum, the output XOR must
    equal the input OR; otherwise any output is valid."""
    moves = []
    for x in product((0, 1), repeat=3):
        for y in product((0, 1), repeat=3):
            if sum(x) % 2 == 0 and (y[0] ^ y[1] ^ y[2]) != (1 if any(x) else 0):
                continue
            moves.append((x, y))
    return Game.make("GHZ", (0, 1), 3, moves)


def symm_game() -> Game:
    """Three players; exactly one must output 1, regardless of inputs."""
    moves = [(x, y) for x in product((0, 1), repeat=3)
             for y in product((0, 1), repeat=3) if sum(y) == 1]
    return Game.make("SYMM", (0, 1), 3, moves)


def chsh_game() -> Game:
    """Two players; the output XOR must equal the input AND."""
    moves = [(x, y) for x in product((0, 1), repeat=2)
             for y in product((0, 1), repeat=2) if (y[0] ^ y[1]) == x[0] * x[1]]
    return Game.make("CHSH", (0, 1), 2, moves)


def copy_game() -> Game:
    """Two players; player 1 must output player 2's input."""
    moves = [(x, y) for x in product((0, 1), repeat=2)
             for y in product((0, 1), repeat=2) if y[0] == x[1]]
    return Game.make("COPY", (0, 1), 2, moves)


def identity_game(m: int = 2) -> Game:
    """Each player echoes its own input."""
    moves = [(x, x) for x in product((0, 1), repeat=m)]
    return Game.make("ID", (0, 1), m, moves)


# ---------------------------------------------------------------------------
# Strong completability

MAX_SC_ALPHABET = 8
MAX_SC_PLAYERS = 4


def _check_sc_size(g: Game) -> None:
    if len(g.alphabet) > MAX_SC_ALPHABET or g.m > MAX_SC_PLAYERS:
        raise ValueError(
            f"completability search capped at |alphabet| <= {MAX_SC_ALPHABET}"
            f" and m <= {MAX_SC_PLAYERS}")


class _ScSearch:
    """Memoized alternating search: given a committed assignment of
    (input, output) pairs for some players and an order over the remaining
    players, does every future input stream admit a valid completion?"""

    def __init__(self, g: Game):
        _check_sc_size(g)
        self.g = g
        self._memo = {}

    def ok(self, committed: Mapping, order: Sequence[int]) -> bool:
        """committed maps player (1-based) -> (input, output)."""
        key = (tuple(sorted(committed.items())), tuple(order))
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        if not order:
            x = _word(committed[i][0] for i in range(1, self.g.m + 1))
            y = _word(committed[i][1] for i in range(1, self.g.m + 1))
            res = self.g.contains(x, y)
        else:
            p, rest = order[0], order[1:]
            res = all(
                any(self.ok({**committed, p: (x, y)}, rest)
                    for y in self.g.alphabet)
                for x in self.g.alphabet)
        self._memo[key] = res
        return res


_SC_CACHE: dict = {}


def _searcher(g: Game) -> _ScSearch:
    s = _SC_CACHE.get(g)
    if s is None:
        s = _SC_CACHE[g] = _ScSearch(g)
    return s


@dataclass(frozen=True)
class CompletabilityReport:
    ok: bool
    failing_order: Optional[tuple] = None  # 1-based player order

    def __bool__(self):
        return self.ok


def is_strongly_completable(g: Game) -> CompletabilityReport:
    """Decide the alternating for-all-input / exists-output condition for
    every play order; on failure report the first failing order."""
    search = _searcher(g)
    for order in permutations(range(1, g.m + 1)):
        if not search.ok({}, order):
            return CompletabilityReport(False, order)
    return CompletabilityReport(True)


def safe_pick(g: Game, committed: Sequence, nxt: tuple):
    """The smallest output (in alphabet order) for the next player such
    that, whatever order the remaining players arrive in and whatever their
    inputs are, a valid completion still exists.

    ``committed`` is a sequence of (player, input, output) triples (players
    1-based); ``nxt`` is (player, input).
    """
    search = _searcher(g)
    fixed = {p: (x, y) for p, x, y in committed}
    p, x = nxt
    if p in fixed:
        raise ValueError(f"player {p} already committed")
    remaining = [q for q in range(1, g.m + 1) if q not in fixed and q != p]
    for y in g.alphabet:
        state = {**fixed, p: (x, y)}
        if all(search.ok(state, order)
               for order in permutations(remaining)):
            return y
    raise CompletabilityError(
        f"no safe output for player {p} with input {x!r} after {committed!r}")


# ---------------------------------------------------------------------------
# Strategies and non-signaling verification


@dataclass(frozen=True)
class Strategy:
    """Input-indexed distribution over output words; exact rationals."""

    game: Game
    table: Mapping  # Word -> Mapping[Word, Fraction]

    def __post_init__(self):
        for x in self.game.inputs():
            dist = self.table.get(_word(x))
            if dist is None:
                raise ValueError(f"strategy undefined on input {x!r}")
            total = sum(dist.values(), Fraction(0))
            if total != 1 or any(p < 0 for p in dist.values()):
                raise ValueError(f"not a distribution on input {x!r}")

    def restriction(self, subset: Sequence[int], x_sub: Word, x_full: Word):
        """Marginal distribution of the players in ``subset`` (1-based,
        ascending) given the full input ``x_full`` (which must agree with
        ``x_sub`` on the subset)."""
        out = {}
        for y, p in self.table[_word(x_full)].items():
            key = _word(y[i - 1] for i in subset)
            out[key] = out.get(key, Fraction(0)) + p
        return {k: v for k, v in out.items() if v != 0}


def uniform_box(g: Game) -> Strategy:
    """The uniform distribution over the valid outputs of each input.

    Requires a solvable game; the result need not be non-signaling in
    general — use ``verify_ns_strategy`` to check.
    """
    table = {}
    for x in g.inputs():
        ys = sorted(g.outputs(x))
        if not ys:
            raise ValueError(f"game has no valid output on input {x!r}")
        table[_word(x)] = {y: Fraction(1, len(ys)) for y in ys}
    return Strategy(g, table)


def ghz_box() -> Strategy:
    """The canonical winning distribution for the GHZ game: uniform over
    the valid outputs on even-sum inputs, uniform over all outputs on
    odd-sum inputs."""
    g = ghz_game()
    table = {}
    for x in g.inputs():
        ys = sorted(g.outputs(x))
        table[_word(x)] = {y: Fraction(1, len(ys)) for y in ys}
    return Strategy(g, table)


def verify_ns_strategy(g: Game, s: Strategy):
    """Check that ``s`` wins with probability one and that every subset
    marginal is independent of the other players' inputs.

    Returns (True, None) or (False, detail dict).
    """
    for x in g.inputs():
        valid = g.outputs(x)
        for y, p in s.table[_word(x)].items():
            if p > 0 and y not in valid:
                return False, {"kind": "losing-output", "input": x,
                               "output": y}
    players = list(range(1, g.m + 1))
    for r in range(1, g.m):
        for subset in permutations(players, r):
            if list(subset) != sorted(subset):
                continue
            groups = {}
            for x in g.inputs():
                key = _word(x[i - 1] for i in subset)
                dist = s.restriction(subset, key, x)
                prev = groups.get(key)
                if prev is None:
                    groups[key] = (dist, x)
                elif prev[0] != dist:
                    return False, {"kind": "signaling", "subset": subset,
                                   "inputs": (prev[1], x)}
    return True, None


class SequentialSampler:
    """Realizes a strategy one player at a time, in any arrival order.

    Each committed output is drawn from the conditional distribution of the
    strategy's marginal on the committed players (the ratio of consecutive
    restriction probabilities); for a non-signaling strategy this is
    well-defined without knowing the absent players' inputs.
    """

    def __init__(self, strategy: Strategy):
        self.strategy = strategy
        self.committed = {}  # player -> (input, output)

    def _marginal(self, subset, x_sub):
        # any full input agreeing on the subset gives the same marginal for
        # a non-signaling strategy
        g = self.strategy.game
        x_full = []
        it = iter(zip(subset, x_sub))
        nxt = next(it, None)
        for i in range(1, g.m + 1):
            if nxt is not None and nxt[0] == i:
                x_full.append(nxt[1])
                nxt = next(it, None)
            else:
                x_full.append(g.alphabet[0])
        return self.strategy.restriction(subset, x_sub, _word(x_full))

    def conditional(self, player: int, x):
        """Distribution of the next output given the committed prefix."""
        if player in self.committed:
            raise ValueError(f"player {player} already measured")
        prev = sorted(self.committed)
        prev_key = _word(self.committed[i][0] for i in prev)
        prev_out = _word(self.committed[i][1] for i in prev)
        subset = sorted(prev + [player])
        x_sub = _word(self.committed[i][0] if i != player else x
                      for i in subset)
        joint = self._marginal(subset, x_sub)
        if prev:
            denom = self._marginal(prev, prev_key).get(prev_out, Fraction(0))
        else:
            denom = Fraction(1)
        pos = subset.index(player)
        out = {}
        for y_sub, p in joint.items():
            if _word(y for i, y in zip(subset, y_sub) if i != player) \
                    == prev_out:
                out[y_sub[pos]] = p / denom
        if not out:
            raise CompletabilityError(
                "committed prefix has probability zero under the strategy")
        return out

    def measure(self, player: int, x, rng: Callable[[], Fraction]):
        """Sample and commit the output of ``player`` with input ``x``.

        ``rng()`` must return a number in [0, 1).
        """
        dist = self.conditional(player, x)
        r = rng()
        acc = Fraction(0)
        choice = None
        for y in sorted(dist):
            acc += dist[y]
            if r < acc:
                choice = y
                break
        if choice is None:  # numeric slack; take the last option
            choice = max(sorted(dist))
        self.committed[player] = (x, choice)
        return choice


# ---------------------------------------------------------------------------
# Deterministic strategy bounds


def max_deterministic_wins(g: Game, inputs: Optional[Iterable] = None):
    """Exhaustively search per-player deterministic strategies.

    Returns (best number of input words won, number of input words
    considered).  ``inputs`` restricts the scoring to a promise subset.
    """
    inputs = [_word(x) for x in (inputs if inputs is not None
                                 else g.inputs())]
    fn_space = list(product(g.alphabet, repeat=len(g.alphabet)))
    idx = {a: i for i, a in enumerate(g.alphabet)}
    best = 0
    for fns in product(fn_space, repeat=g.m):
        wins = sum(
            1 for x in inputs
            if g.contains(x, _word(fns[i][idx[x[i]]] for i in range(g.m))))
        best = max(best, wins)
    return best, len(inputs)


# ---------------------------------------------------------------------------
# Game file format


def parse_game(text: str, name: str = "") -> Game:
    header = None
    moves = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("game"):
            m = _re.match(r"game\s+m=(\d+)\s+sigma=(\S+)\Z", line)
            if not m:
                raise GameFormatError(f"line {lineno}: bad game header")
            header = (int(m.group(1)), tuple(m.group(2).split(",")))
            continue
        if header is None:
            raise GameFormatError(f"line {lineno}: move before header")
        if "->" not in line:
            raise GameFormatError(f"line {lineno}: expected 'x... -> y...'")
        left, right = line.split("->", 1)
        x, y = tuple(left.split()), tuple(right.split())
        moves.append((x, y))
    if header is None:
        raise GameFormatError("missing 'game' header")
    m, sigma = header
    # symbols that look like integers are treated as integers
    def conv(tok):
        return int(tok) if tok.lstrip("-").isdigit() else tok
    sigma = tuple(conv(t) for t in sigma)
    moves = [(tuple(conv(t) for t in x), tuple(conv(t) for t in y))
             for x, y in moves]
    return Game.make(name, sigma, m, moves)


def serialize_game(g: Game) -> str:
    lines = [f"game m={g.m} sigma={','.join(str(a) for a in g.alphabet)}"]
    for x, y in sorted(g.relation):
        lines.append(" ".join(str(s) for s in x) + " -> "
                     + " ".join(str(s) for s in y))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Circuits of half-games


_BUILTIN_FNS = {
    "id": lambda args: args,
    "xor": lambda args: (args[0] ^ args[1],),
    "and": lambda args: (args[0] & args[1],),
    "or": lambda args: (args[0] | args[1],),
    "not": lambda args: (1 - args[0],),
}


@dataclass(frozen=True)
class _Gate:
    gid: str
    fn: Callable
    fn_name: str
    inputs: tuple
    outputs: tuple


@dataclass
class HalfGameCircuit:
    """A DAG of gates with one external input wire and d detached
    half-game ports; half-game i reads wire x_i and writes wire y_i, and
    the indices follow a topological order of the DAG."""

    d: int
    alphabet: tuple
    xi_wire: str
    gates: list = field(default_factory=list)  # list[_Gate]
    halfgames: list = field(default_factory=list)  # [(i, x_wire, y_wire)]

    def __post_init__(self):
        self.halfgames = sorted(self.halfgames)
        if [i for i, _, _ in self.halfgames] != list(range(1, self.d + 1)):
            raise GameFormatError("half-games must be indexed 1..d")
        self._producer = {}
        for gate in self.gates:
            for w in gate.outputs:
                if w in self._producer:
                    raise GameFormatError(f"wire {w!r} written twice")
                self._producer[w] = gate
        self._y_wire = {w: i for i, _, w in self.halfgames}
        # acyclicity + topological half-game order are enforced on use:
        # evaluating prefix d with all outputs known must terminate
        self.eval_prefix(self.d, self.alphabet[0],
                         (self.alphabet[0],) * (self.d - 1))

    def eval_prefix(self, k: int, xi, ys: Sequence) -> tuple:
        """Evaluate the sub-circuit feeding half-games 1..k.

        ``ys`` holds the outputs of half-games 1..k-1; returns the inputs
        x_1..x_k.  The result depends only on the given values.
        """
        if not 1 <= k <= self.d:
            raise ValueError(f"prefix index {k} out of range 1..{self.d}")
        if len(ys) < k - 1:
            raise ValueError(f"need {k - 1} half-game outputs, got {len(ys)}")
        values = {self.xi_wire: xi}
        for (i, _, y_wire), y in zip(self.halfgames, ys):
            if i < k:
                values[y_wire] = y
        visiting = set()

        def wire(w):
            if w in values:
                return values[w]
            if w in self._y_wire:
                raise GameFormatError(
                    f"half-game {self._y_wire[w]} output needed before its "
                    f"turn (half-games not topologically ordered)")
            gate = self._producer.get(w)
            if gate is None:
                raise GameFormatError(f"wire {w!r} has no producer")
            if gate.gid in visiting:
                raise GameFormatError(f"cycle through gate {gate.gid!r}")
            visiting.add(gate.gid)
            outs = gate.fn(tuple(wire(x) for x in gate.inputs))
            visiting.discard(gate.gid)
            if len(outs) != len(gate.outputs):
                raise GameFormatError(f"gate {gate.gid!r} arity mismatch")
            for ow, ov in zip(gate.outputs, outs):
                values[ow] = ov
            return values[w]

        return tuple(wire(xw) for i, xw, _ in self.halfgames if i <= k)


def chain_circuit(d: int, alphabet=(0, 1)) -> HalfGameCircuit:
    """x_1 = external input; x_{i+1} = y_i."""
    gates = [_Gate("g0", _BUILTIN_FNS["id"], "id", ("xi",), ("x1",))]
    hgs = [(1, "x1", "y1")]
    for i in range(2, d + 1):
        gates.append(_Gate(f"g{i - 1}", _BUILTIN_FNS["id"], "id",
                           (f"y{i - 1}",), (f"x{i}",)))
        hgs.append((i, f"x{i}", f"y{i}"))
    return HalfGameCircuit(d, tuple(alphabet), "xi", gates, hgs)


def _table_fn(entries: Mapping) -> Callable:
    def fn(args):
        out = entries.get(tuple(args))
        if out is None:
            raise GameFormatError(f"table has no entry for {args!r}")
        return out
    return fn


def random_circuit(d: int, rng, alphabet=(0, 1)) -> HalfGameCircuit:
    """A random degree-d circuit: each half-game input is a random function
    of the external input and a random subset of earlier outputs.

    ``rng`` is a ``random.Random``-like object.
    """
    alphabet = tuple(alphabet)
    gates = []
    hgs = []
    for i in range(1, d + 1):
        deps = ["xi"] + [f"y{j}" for j in range(1, i)
                         if rng.random() < 0.5]
        entries = {args: (rng.choice(alphabet),)
                   for args in product(alphabet, repeat=len(deps))}
        fname = "tbl:" + ",".join(
            "".join(str(s) for s in k) + ">" + str(v[0])
            for k, v in sorted(entries.items()))
        gates.append(_Gate(f"g{i}", _table_fn(entries), fname,
                           tuple(deps), (f"x{i}",)))
        hgs.append((i, f"x{i}", f"y{i}"))
    return HalfGameCircuit(d, alphabet, "xi", gates, hgs)


def parse_circuit(text: str) -> HalfGameCircuit:
    d = None
    alphabet = (0, 1)
    xi_wire = None
    gates = []
    hgs = []

    def conv(tok):
        return int(tok) if tok.lstrip("-").isdigit() else tok

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        kind = parts[0]
        try:
            if kind == "circuit":
                kv = dict(p.split("=", 1) for p in parts[1:])
                d = int(kv["d"])
                if "sigma" in kv:
                    alphabet = tuple(conv(t) for t in kv["sigma"].split(","))
            elif kind == "input":
                xi_wire = dict(p.split("=", 1) for p in parts[1:])["xi"]
            elif kind == "halfgame":
                kv = dict(p.split("=", 1) for p in parts[2:])
                hgs.append((int(parts[1]), kv["in"], kv["out"]))
            elif kind == "gate":
                gid, fname = parts[1], parts[2]
                arrow = parts.index("->")
                ins = tuple(w for tok in parts[3:arrow]
                            for w in tok.split(","))
                outs = tuple(w for tok in parts[arrow + 1:]
                             for w in tok.split(","))
                if fname in _BUILTIN_FNS:
                    fn = _BUILTIN_FNS[fname]
                elif fname.startswith("tbl:"):
                    entries = {}
                    for ent in fname[4:].split(","):
                        k, _, v = ent.partition(">")
                        entries[tuple(conv(c) for c in k)] = \
                            tuple(conv(c) for c in v)
                    fn = _table_fn(entries)
                else:
                    raise GameFormatError(f"unknown function {fname!r}")
                gates.append(_Gate(gid, fn, fname, ins, outs))
            else:
                raise GameFormatError(f"unknown directive {kind!r}")
        except (KeyError, ValueError, IndexError) as e:
            raise GameFormatError(f"line {lineno}: {e}") from e
    if d is None or xi_wire is None:
        raise GameFormatError("missing 'circuit' or 'input' line")
    return HalfGameCircuit(d, alphabet, xi_wire, gates, hgs)


def serialize_circuit(c: HalfGameCircuit) -> str:
    lines = [f"circuit d={c.d} "
             f"sigma={','.join(str(a) for a in c.alphabet)}",
             f"input xi={c.xi_wire}"]
    for g in c.gates:
        lines.append(f"gate {g.gid} {g.fn_name} {','.join(g.inputs)} -> "
                     f"{','.join(g.outputs)}")
    for i, xw, yw in c.halfgames:
        lines.append(f"halfgame {i} in={xw} out={yw}")
    return "\n".join(lines) + "\n"
