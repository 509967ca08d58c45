import json
import threading
import urllib.error
import urllib.request

import pytest

from taxoforge.service import MAX_LIMIT, TaxonomyServer, handle, parse_addr
from taxoforge.store import TaxonomyGraph


@pytest.fixture(scope="module")
def wide_graph():
    g = TaxonomyGraph()
    for i in range(1500):
        g.add_edge(f"e{i:04d}", "thing", ["tag"])
        g.register_entity(f"e{i:04d}")
    g.add_edge("刘德华", "演员", ["bracket"])
    g.mentions["刘德华"].add("刘德华")
    return g


def body(target, graph):
    status, raw = handle(graph, target)
    return status, json.loads(raw)


def test_envelope_shape(wide_graph):
    status, b = body("/getConcept?entity=%E5%88%98%E5%BE%B7%E5%8D%8E", wide_graph)
    assert status == 200
    assert b == {"status": "ok", "results": ["演员"], "total": 1, "offset": 0, "limit": 100}


def test_pagination_and_clamp(wide_graph):
    _, b = body("/getEntity?concept=thing&offset=10&limit=5", wide_graph)
    assert b["results"] == [f"e{i:04d}" for i in range(10, 15)] and b["total"] == 1500
    _, b = body("/getEntity?concept=thing&limit=5000", wide_graph)
    assert b["limit"] == MAX_LIMIT and len(b["results"]) == MAX_LIMIT
    _, b = body("/getEntity?concept=thing&offset=1499", wide_graph)
    assert b["results"] == ["e1499"]
    _, b = body("/men2ent?mention=nobody", wide_graph)
    assert b["results"] == [] and b["total"] == 0


@pytest.mark.parametrize("target, status", [
    ("/getEntity", 400),
    ("/getEntity?concept=", 400),
    ("/getEntity?concept=thing&offset=-1", 400),
    ("/getEntity?concept=thing&limit=ten", 400),
    ("/men2ent?entity=x", 400),
    ("/nothing", 404),
])
def test_errors(wide_graph, target, status):
    got, b = body(target, wide_graph)
    assert got == status and b["status"] == "error" and b["error"]


def test_parse_addr():
    assert parse_addr("0.0.0.0:9000") == ("0.0.0.0", 9000)
    assert parse_addr(":9000") == ("127.0.0.1", 9000)


def test_live_server_concurrent(wide_graph):
    server = TaxonomyServer(wide_graph, ("127.0.0.1", 0))
    server.start_background()
    results, errors = [], []

    def fetch(i):
        try:
            with urllib.request.urlopen(f"{server.url}/getEntity?concept=thing&offset={i}&limit=1", timeout=5) as r:
                assert r.headers["Content-Type"].startswith("application/json")
                results.append(json.loads(r.read())["results"][0])
        except Exception as exc:  # collected for the assertion below
            errors.append(exc)

    try:
        threads = [threading.Thread(target=fetch, args=(i,)) for i in range(20)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        with pytest.raises(urllib.error.HTTPError) as info:
            urllib.request.urlopen(f"{server.url}/getConcept", timeout=5)
        assert info.value.code == 400
    finally:
        server.stop()
    assert not errors
    assert sorted(results) == [f"e{i:04d}" for i in range(20)]
