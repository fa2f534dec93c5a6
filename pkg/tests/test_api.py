import pytest
from fastapi.testclient import TestClient

from relim.core import serialize_problem
from relim.family import pi
from relim.server import create_app, replay


@pytest.fixture()
def client():
    return TestClient(create_app(), raise_server_exceptions=False)


@pytest.fixture()
def sid(client):
    r = client.post("/api/sessions")
    assert r.status_code == 200
    return r.json()["session_id"]


def _load_pi(client, sid, i=0, delta=3):
    r = client.post(f"/api/sessions/{sid}/problems",
                    json={"text": serialize_problem(pi(i, delta))})
    assert r.status_code == 200, r.text
    return r.json()["pid"]


def test_load_and_inspect(client, sid):
    pid = _load_pi(client, sid)
    r = client.get(f"/api/sessions/{sid}/problems/{pid}")
    assert r.status_code == 200
    doc = r.json()
    assert doc["v"] == 1
    assert doc["white_arity"] == 3 and doc["black_arity"] == 3
    assert doc["alphabet_size"] == len(pi(0, 3).alphabet)
    assert doc["white"] and doc["black"]
    assert doc["text"] == serialize_problem(pi(0, 3))
    assert len(doc["hash"]) == 64


def test_generator_load(client, sid):
    r = client.post(f"/api/sessions/{sid}/problems",
                    json={"generator": {"kind": "pi", "delta": 3, "i": 1}})
    assert r.status_code == 200
    assert r.json()["summary"]["op"] == "generator"
    r = client.post(f"/api/sessions/{sid}/problems",
                    json={"generator": {"kind": "nope", "delta": 3}})
    assert r.status_code == 400


def test_derivation_chain_and_tree_replay(client, sid):
    pid = _load_pi(client, sid)
    r = client.post(f"/api/sessions/{sid}/problems/{pid}/re", json={})
    assert r.status_code == 200
    doc = r.json()
    cur = doc["new_pid"]
    assert doc["diff"]["alphabet_size"][0] == len(pi(0, 3).alphabet)
    merges = 0
    while True:
        r = client.post(f"/api/sessions/{sid}/problems/{cur}/heuristic",
                        json={"side": "white"})
        assert r.status_code == 200
        doc = r.json()
        if doc["new_pid"] is None:
            assert doc["pair"] is None
            break
        assert doc["pair"]
        cur = doc["new_pid"]
        merges += 1
        assert merges < 50
    assert merges > 0
    r = client.post(f"/api/sessions/{sid}/problems/{cur}/rere", json={})
    assert r.status_code == 200
    final = r.json()["new_pid"]

    r = client.get(f"/api/sessions/{sid}/tree")
    tree = r.json()
    assert tree["v"] == 1
    pids = [n["pid"] for n in tree["nodes"]]
    assert pids[0] == pid and pids[-1] == final
    assert len(tree["edges"]) == len(pids) - 1
    ops = {n["pid"]: n["op"] for n in tree["nodes"]}
    assert ops[pid] == "load" and ops[final] == "rere"

    def text_of(p):
        return client.get(f"/api/sessions/{sid}/problems/{p}").json()["text"]

    assert replay(tree, text_of)


def test_diagram_endpoint(client, sid):
    pid = _load_pi(client, sid, i=1, delta=4)
    r = client.get(f"/api/sessions/{sid}/problems/{pid}/diagram",
                   params={"side": "black"})
    assert r.status_code == 200
    doc = r.json()
    assert doc["side"] == "black"
    assert ["E_4", "Q_4"] in doc["edges"]
    assert set(doc["nodes"]) == set(pi(1, 4).alphabet)
    r = client.get(f"/api/sessions/{sid}/problems/{pid}/diagram",
                   params={"side": "sideways"})
    assert r.status_code == 400


def test_zero_round_endpoint(client, sid):
    pid = _load_pi(client, sid, i=1, delta=3)
    r = client.post(f"/api/sessions/{sid}/problems/{pid}/zero-round",
                    json={})
    assert r.status_code == 200
    assert r.json() == {"v": 1, "solvable": False}
    r = client.post(f"/api/sessions/{sid}/problems",
                    json={"text": "problem t\nwhite\nA A A\nblack\nA A A\n"})
    tid = r.json()["pid"]
    r = client.post(f"/api/sessions/{sid}/problems/{tid}/zero-round",
                    json={})
    doc = r.json()
    assert doc["solvable"] and doc["witness"]


def test_merge_endpoint_errors(client, sid):
    pid = _load_pi(client, sid)
    r = client.post(f"/api/sessions/{sid}/problems/{pid}/merge",
                    json={"a": "MM_2", "b": "nope"})
    assert r.status_code == 400
    r = client.post(f"/api/sessions/{sid}/problems/{pid}/merge",
                    json={"a": "MM_2"})
    assert r.status_code == 400
    r = client.post(f"/api/sessions/{sid}/problems/{pid}/merge",
                    json={"a": "MM_2", "b": "MM_3"})
    assert r.status_code == 200


def test_not_found(client, sid):
    assert client.get(f"/api/sessions/{sid}/problems/p99").status_code == 404
    assert client.get("/api/sessions/nosuch/tree").status_code == 404
    body = client.get(f"/api/sessions/{sid}/problems/p99").json()
    assert set(body) == {"error", "detail"}


def test_alphabet_cap_409(client, sid):
    lines = []
    n = 0
    for _ in range(257):
        labs = [f"L{n + j}" for j in range(16)]
        n += 16
        lines.append(" ".join(labs))
    text = "problem big\nwhite\n" + "\n".join(lines) + "\nblack\n" + \
        " ".join(["L0"] * 16) + "\n"
    r = client.post(f"/api/sessions/{sid}/problems", json={"text": text})
    assert r.status_code == 409


def test_bad_load_body(client, sid):
    r = client.post(f"/api/sessions/{sid}/problems", json={})
    assert r.status_code == 400
    r = client.post(f"/api/sessions/{sid}/problems",
                    json={"text": "white\nA [B\nblack\nA A A\n"})
    assert r.status_code == 400


def test_simulate_endpoint(client):
    r = client.post("/api/simulate",
                    json={"kind": "classical-ghz", "delta": 3, "n": 6,
                          "trials": 2, "seed": "api"})
    assert r.status_code == 200
    doc = r.json()
    assert doc["passes"] == 2 and doc["rounds_max"] == 6
    r = client.post("/api/simulate", json={"kind": "classical-ghz",
                                           "delta": 3, "trials": 5000})
    assert r.status_code == 409
    r = client.post("/api/simulate", json={"kind": "nope", "delta": 3})
    assert r.status_code == 400
