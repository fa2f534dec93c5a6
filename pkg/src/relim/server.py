"""HTTP/JSON service exposing the engine to the exploration UI and scripts.

Sessions live in memory.  Every derivation appends an immutable snapshot to
the session's provenance tree; replaying the recorded operations from the
root reproduces each snapshot byte-identically (the snapshot hash is the
SHA-256 of the serialized problem text).
"""

from __future__ import annotations

import hashlib
import itertools
import os
import threading
import time
import uuid
from dataclasses import dataclass, field
from typing import Optional

from fastapi import Body, FastAPI
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from relim.core import (
    ArityError,
    ExpansionCapError,
    ParseError,
    Problem,
    parse_problem,
    serialize_problem,
)
from relim import family, netsim, rounds

MAX_ALPHABET = 4096


class ApiError(Exception):
    def __init__(self, status: int, error: str, detail: str):
        super().__init__(detail)
        self.status = status
        self.error = error
        self.detail = detail


def _bad_request(detail: str) -> ApiError:
    return ApiError(400, "bad-request", detail)


def _not_found(detail: str) -> ApiError:
    return ApiError(404, "not-found", detail)


def _too_large(detail: str) -> ApiError:
    return ApiError(409, "size-cap", detail)


@dataclass(frozen=True)
class Snapshot:
    pid: str
    problem: Problem
    text: str            # canonical serialization, hashed below
    hash: str
    op: str              # "load" | "generator" | "re" | "rere" | "merge" | "heuristic"
    params: dict
    parent: Optional[str]
    created: float


@dataclass
class Session:
    sid: str
    created: float
    snapshots: dict = field(default_factory=dict)  # pid -> Snapshot
    order: list = field(default_factory=list)
    lock: threading.Lock = field(default_factory=threading.Lock)
    _counter: itertools.count = field(default_factory=itertools.count)

    def add(self, problem: Problem, op: str, params: dict,
            parent: Optional[str]) -> Snapshot:
        if len(problem.alphabet) > MAX_ALPHABET:
            raise _too_large(
                f"alphabet size {len(problem.alphabet)} exceeds the "
                f"{MAX_ALPHABET}-label cap")
        text = serialize_problem(problem)
        snap = Snapshot(
            pid=f"p{next(self._counter)}",
            problem=problem,
            text=text,
            hash=hashlib.sha256(text.encode()).hexdigest(),
            op=op, params=params, parent=parent, created=time.time())
        self.snapshots[snap.pid] = snap
        self.order.append(snap.pid)
        return snap

    def get(self, pid: str) -> Snapshot:
        snap = self.snapshots.get(pid)
        if snap is None:
            raise _not_found(f"unknown problem id {pid!r}")
        return snap


def _summary(snap: Snapshot) -> dict:
    p = snap.problem
    return {
        "v": 1,
        "pid": snap.pid,
        "name": p.name,
        "op": snap.op,
        "params": snap.params,
        "parent": snap.parent,
        "hash": snap.hash,
        "alphabet_size": len(p.alphabet),
        "white_configs": len(p.white.configs),
        "black_configs": len(p.black.configs),
    }


def _condensed_json(c) -> list:
    return [sorted(g) for g in c]


def _generate(spec: dict) -> Problem:
    kind = spec.get("kind")
    try:
        delta = int(spec["delta"])
    except (KeyError, TypeError, ValueError):
        raise _bad_request("generator spec needs an integer 'delta'")
    try:
        if kind == "ghz":
            return family.iterated_ghz(delta)
        if kind == "chsh":
            return family.iterated_chsh(delta)
        if kind in ("pi", "pi-prime"):
            i = spec.get("i")
            if i is None:
                raise _bad_request(f"generator {kind!r} needs 'i'")
            fn = family.pi if kind == "pi" else family.pi_prime
            return fn(int(i), delta)
    except ValueError as exc:
        raise _bad_request(str(exc))
    raise _bad_request(f"unknown generator kind {kind!r}")


def create_app() -> FastAPI:
    app = FastAPI(title="relim")
    sessions: dict[str, Session] = {}

    @app.exception_handler(ApiError)
    async def _api_error(_req, exc: ApiError):
        return JSONResponse(status_code=exc.status,
                            content={"error": exc.error,
                                     "detail": exc.detail})

    @app.exception_handler(Exception)
    async def _internal(_req, exc: Exception):
        return JSONResponse(status_code=500,
                            content={"error": "internal",
                                     "detail": repr(exc)})

    def _session(sid: str) -> Session:
        s = sessions.get(sid)
        if s is None:
            raise _not_found(f"unknown session id {sid!r}")
        return s

    @app.post("/api/sessions")
    def create_session():
        sid = uuid.uuid4().hex[:12]
        sessions[sid] = Session(sid, time.time())
        return {"v": 1, "session_id": sid}

    @app.post("/api/sessions/{sid}/problems")
    def load_problem(sid: str, body: dict = Body(...)):
        s = _session(sid)
        if "text" in body:
            try:
                p = parse_problem(body["text"])
            except (ParseError, ArityError, ValueError) as exc:
                raise _bad_request(str(exc))
            op, params = "load", {"text": body["text"]}
        elif "generator" in body:
            p = _generate(body["generator"])
            op, params = "generator", dict(body["generator"])
        else:
            raise _bad_request("body must contain 'text' or 'generator'")
        with s.lock:
            snap = s.add(p, op, params, None)
        return {"v": 1, "pid": snap.pid, "summary": _summary(snap)}

    @app.get("/api/sessions/{sid}/problems/{pid}")
    def get_problem(sid: str, pid: str):
        snap = _session(sid).get(pid)
        p = snap.problem
        out = _summary(snap)
        out.update({
            "alphabet": list(p.alphabet),
            "white": [_condensed_json(c) for c in sorted(
                p.white.configs, key=lambda c: _condensed_json(c))],
            "black": [_condensed_json(c) for c in sorted(
                p.black.configs, key=lambda c: _condensed_json(c))],
            "white_arity": p.white.arity,
            "black_arity": p.black.arity,
            "sets": ({n: sorted(members) for n, members in p.sets.items()}
                     if p.sets is not None else None),
            "text": snap.text,
        })
        return out

    def _derive(sid: str, pid: str, op: str, params: dict,
                fn) -> dict:
        s = _session(sid)
        parent = s.get(pid)
        try:
            child_problem = fn(parent.problem)
        except KeyError as exc:
            raise _bad_request(str(exc))
        except (ArityError, ExpansionCapError) as exc:
            raise _too_large(str(exc))
        except ValueError as exc:
            raise _bad_request(str(exc))
        with s.lock:
            snap = s.add(child_problem, op, params, pid)
        return {
            "v": 1,
            "new_pid": snap.pid,
            "summary": _summary(snap),
            "diff": {
                "alphabet_size": [len(parent.problem.alphabet),
                                  len(child_problem.alphabet)],
                "white_configs": [len(parent.problem.white.configs),
                                  len(child_problem.white.configs)],
                "black_configs": [len(parent.problem.black.configs),
                                  len(child_problem.black.configs)],
            },
        }

    @app.post("/api/sessions/{sid}/problems/{pid}/re")
    def do_re(sid: str, pid: str, body: dict = Body(default={})):
        method = body.get("method", "combination")
        if method not in ("combination", "direct"):
            raise _bad_request(f"unknown method {method!r}")
        return _derive(sid, pid, "re", {"method": method},
                       lambda p: rounds.re(p, method=method))

    @app.post("/api/sessions/{sid}/problems/{pid}/rere")
    def do_rere(sid: str, pid: str, body: dict = Body(default={})):
        method = body.get("method", "combination")
        if method not in ("combination", "direct"):
            raise _bad_request(f"unknown method {method!r}")
        return _derive(sid, pid, "rere", {"method": method},
                       lambda p: rounds.rere(p, method=method))

    @app.post("/api/sessions/{sid}/problems/{pid}/merge")
    def do_merge(sid: str, pid: str, body: dict = Body(...)):
        a, b = body.get("a"), body.get("b")
        if not isinstance(a, str) or not isinstance(b, str):
            raise _bad_request("merge body needs string fields 'a' and 'b'")
        return _derive(sid, pid, "merge", {"a": a, "b": b},
                       lambda p: rounds.merge_labels(p, a, b))

    @app.post("/api/sessions/{sid}/problems/{pid}/heuristic")
    def do_heuristic(sid: str, pid: str, body: dict = Body(default={})):
        side = body.get("side", "white")
        if side not in ("white", "black"):
            raise _bad_request(f"unknown side {side!r}")
        s = _session(sid)
        parent = s.get(pid)
        pair = rounds.heuristic_relax_step(parent.problem, side=side)
        if pair is None:
            return {"v": 1, "new_pid": None, "pair": None,
                    "detail": "no merge suggested"}
        out = _derive(sid, pid, "heuristic",
                      {"side": side, "a": pair[0], "b": pair[1]},
                      lambda p: rounds.merge_labels(p, *pair))
        out["pair"] = list(pair)
        return out

    @app.get("/api/sessions/{sid}/problems/{pid}/diagram")
    def get_diagram(sid: str, pid: str, side: str = "white"):
        if side not in ("white", "black"):
            raise _bad_request(f"unknown side {side!r}")
        snap = _session(sid).get(pid)
        d = rounds.diagram(snap.problem, side)
        pair = rounds.heuristic_relax_step(snap.problem, side=side,
                                           diag=d)
        return {
            "v": 1,
            "side": side,
            "nodes": list(d.nodes),
            "edges": [list(e) for e in d.edges],
            "equal_pairs": [list(e) for e in d.equal_pairs],
            "heuristic_pair": list(pair) if pair else None,
        }

    @app.post("/api/sessions/{sid}/problems/{pid}/zero-round")
    def do_zero_round(sid: str, pid: str, body: dict = Body(default={})):
        colored = bool(body.get("colored", True))
        snap = _session(sid).get(pid)
        try:
            witness = rounds.zero_round_solvable(snap.problem,
                                                 colored=colored)
        except ExpansionCapError as exc:
            raise _too_large(str(exc))
        out = {"v": 1, "solvable": witness is not None}
        if isinstance(witness, dict):
            out["witness"] = {str(k): v for k, v in witness.items()}
        elif witness is not None:
            out["witness"] = list(witness)
        return out

    @app.get("/api/sessions/{sid}/tree")
    def get_tree(sid: str):
        s = _session(sid)
        return {
            "v": 1,
            "session_id": sid,
            "nodes": [_summary(s.snapshots[pid]) for pid in s.order],
            "edges": [{"parent": s.snapshots[pid].parent, "child": pid,
                       "op": s.snapshots[pid].op}
                      for pid in s.order
                      if s.snapshots[pid].parent is not None],
        }

    @app.post("/api/simulate")
    def do_simulate(body: dict = Body(...)):
        kind = body.get("kind")
        if kind not in ("classical-ghz", "quantum-ghz", "games-net"):
            raise _bad_request(f"unknown simulation kind {kind!r}")
        try:
            delta = int(body["delta"])
            n_white = int(body.get("n", 9))
            trials = int(body.get("trials", 1))
        except (KeyError, TypeError, ValueError):
            raise _bad_request("simulate body needs integer 'delta' "
                               "(and optional 'n', 'trials')")
        if not (1 <= trials <= 1000) or not (1 <= n_white <= 3000):
            raise _too_large("trials must be in 1..1000 and n in 1..3000")
        if kind == "games-net" and not (1 <= delta <= 8):
            raise _too_large("games-net d must be in 1..8")
        if kind != "games-net" and not (3 <= delta <= 16):
            raise _bad_request("delta must be in 3..16")
        seed = str(body.get("seed", "0"))
        return netsim.simulate_batch(kind, delta, n_white, seed, trials)

    static_dir = os.environ.get("RELIM_STATIC_DIR")
    if static_dir and os.path.isdir(static_dir):
        app.mount("/", StaticFiles(directory=static_dir, html=True),
                  name="ui")

    return app


def replay(session_tree: dict, get_problem_text) -> bool:
    """Re-run every recorded operation of a provenance tree and compare the
    resulting serializations to the recorded hashes.  ``get_problem_text``
    maps a pid to its stored canonical text (used only for root loads)."""
    derived = {}
    for node in session_tree["nodes"]:
        pid, op, params = node["pid"], node["op"], node["params"]
        if op == "load":
            p = parse_problem(params["text"])
        elif op == "generator":
            p = _generate(params)
        else:
            src = derived[node["parent"]]
            if op == "re":
                p = rounds.re(src, method=params["method"])
            elif op == "rere":
                p = rounds.rere(src, method=params["method"])
            elif op in ("merge", "heuristic"):
                p = rounds.merge_labels(src, params["a"], params["b"])
            else:
                raise ValueError(f"unknown op {op!r}")
        derived[pid] = p
        text = serialize_problem(p)
        if hashlib.sha256(text.encode()).hexdigest() != node["hash"]:
            return False
        if get_problem_text is not None and get_problem_text(pid) != text:
            return False
    return True
