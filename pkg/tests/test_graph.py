import io

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from covertime import graph as G
from covertime.graph import GraphError, load_edge_list, save_edge_list, stats, validate


def test_triangle_from_text():
    g = load_edge_list(b"0 1\n1 2\n2 0")
    assert (g.n, g.m) == (3, 3)
    validate(g)


def test_duplicates_and_loops_dropped():
    g = load_edge_list(b"0 1\n0 1\n1 1\n1 2")
    assert (g.n, g.m) == (3, 2)
    assert g.adjacency == ((1,), (0, 2), (1,))
    assert g.info["self_loops"] == 1


def test_comments_and_sparse_ids():
    g = load_edge_list(io.StringIO("# header\n% konect style\n10 400\n400 7\n"))
    assert g.n == 3 and g.m == 2
    assert g.labels.tolist() == [7, 10, 400]


def test_csv_dialect_with_header(tmp_path):
    p = tmp_path / "pages.csv"
    p.write_text("id_1,id_2\n0,5\n5,9\n")
    g = load_edge_list(p, format="csv")
    assert (g.n, g.m) == (3, 2)


def test_disconnected_keeps_largest_component(caplog):
    g = load_edge_list(b"0 1\n1 2\n2 3\n10 11\n")
    assert (g.n, g.m) == (4, 3)
    assert g.info["dropped_nodes"] == 2
    assert g.info["dropped_edges"] == 1
    assert "largest component" in caplog.text


@pytest.mark.parametrize("text, lineno", [(b"0 1\nfoo bar\n", 2), (b"0 1\n2\n", 2), (b"0 -1\n", 1)])
def test_malformed_line_reports_line_number(text, lineno):
    with pytest.raises(GraphError, match=f"line {lineno}"):
        load_edge_list(text)


@pytest.mark.parametrize("text", [b"", b"# only a comment\n", b"3 3\n"])
def test_empty_graph_is_error(text):
    with pytest.raises(GraphError):
        load_edge_list(text)


def test_binary_stream():
    g = load_edge_list(io.BytesIO(b"1 2\n2 3\n"))
    assert g.m == 2


def test_save_load_roundtrip_canonical(tmp_path):
    g = G.barabasi_albert(200, 3, seed=4)
    p = tmp_path / "g.txt"
    save_edge_list(g, p)
    lines = p.read_text().splitlines()
    pairs = [tuple(map(int, x.split())) for x in lines]
    assert all(u < v for u, v in pairs) and pairs == sorted(pairs) and len(pairs) == g.m
    h = load_edge_list(p)
    assert h.adjacency == g.adjacency


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 30), st.integers(0, 30)), min_size=1, max_size=80))
def test_loader_output_is_valid_or_rejected(pairs):
    text = "".join(f"{u} {v}\n" for u, v in pairs)
    try:
        g = load_edge_list(text.encode())
    except GraphError:
        assert all(u == v for u, v in pairs)
        return
    validate(g)
    buf = io.StringIO()
    save_edge_list(g, buf)
    assert load_edge_list(buf.getvalue().encode()).adjacency == g.adjacency


@pytest.mark.parametrize("g, n, m, degs", [
    (G.complete(4), 4, 6, {3}),
    (G.star(5), 5, 4, {1, 4}),
    (G.hypercube(3), 8, 12, {3}),
    (G.path(5), 5, 4, {1, 2}),
    (G.cycle(6), 6, 6, {2}),
    (G.lollipop(4, 3), 7, 9, {1, 2, 3, 4}),
    (G.mesh3d(2, 3, 4), 24, 46, {3, 4, 5}),
])
def test_generators(g, n, m, degs):
    validate(g)
    assert (g.n, g.m) == (n, m)
    assert set(g.degrees) == degs


def test_star_center_degree():
    g = G.star(5)
    assert g.degrees == (4, 1, 1, 1, 1)


def test_lollipop_matches_networkx():
    g = G.lollipop(4, 3)
    ref = nx.lollipop_graph(4, 3)
    assert sorted(map(tuple, g.edges().tolist())) == sorted(tuple(sorted(e)) for e in ref.edges())


@pytest.mark.parametrize("kind, args", [
    ("barabasi_albert", (500, 2, 11)),
    ("random_geometric", (150, 0.05, 3)),
])
def test_random_generators_reproducible_and_connected(kind, args):
    a = G.generate(kind, *args)
    b = G.generate(kind, *args)
    validate(a)
    assert a.adjacency == b.adjacency
    assert np.array_equal(a.indices, b.indices)


def test_random_geometric_grows_radius():
    g = G.random_geometric(150, 0.01, seed=3)
    assert g.info["radius"] > 0.01
    validate(g)


def test_generator_specs():
    assert G.generate("complete(4)").m == 6
    assert G.generate("ba:n=100,k=2,seed=1").n == 100
    assert G.generate("lollipop:clique_n=4,path_len=3").n == 7
    assert G.generate("hypercube", dim=2).m == 4


@pytest.mark.parametrize("spec", ["complete(1)", "star(1)", "path(0)", "hypercube(0)", "nosuch(3)",
                                  "ba:n=2,k=2"])
def test_generator_errors(spec):
    with pytest.raises(GraphError):
        G.generate(spec)


@pytest.mark.parametrize("g, clustering, diameter", [
    (G.complete(3), 1.0, 1),
    (G.path(3), 0.0, 2),
    (G.star(5), 0.0, 2),
    (G.hypercube(3), 0.0, 3),
])
def test_stats_small(g, clustering, diameter):
    s = stats(g)
    assert s.clustering == clustering
    assert s.diameter == diameter and s.diameter_exact


def test_stats_against_networkx():
    g = G.barabasi_albert(400, 3, seed=2)
    ref = nx.Graph(g.edges().tolist())
    s = stats(g)
    assert s.clustering == pytest.approx(nx.transitivity(ref), rel=1e-12)
    assert s.diameter == nx.diameter(ref)
    bound = stats(g, exact_diameter=False)
    assert not bound.diameter_exact and 1 <= bound.diameter <= s.diameter


def test_stats_csv_header():
    assert stats(G.complete(3)).csv().splitlines() == ["n,m,clustering,diameter,diameter_exact",
                                                       "3,3,1.000000,1,true"]


def test_degree_histogram():
    assert G.degree_histogram(G.star(5)) == [(1, 4), (4, 1)]
    assert G.degree_histogram(G.complete(4)) == [(3, 4)]


def test_ba_degree_histogram_right_skewed():
    hist = dict(G.degree_histogram(G.barabasi_albert(1000, 2, seed=5)))
    assert sum(hist.values()) == 1000
    lo = min(hist)
    assert all(hist[lo] > c for d, c in hist.items() if d >= 10)


def test_edge_ids_are_undirected():
    g = G.complete(5)
    ids = {g.edge_id(u, v) for u in range(5) for v in range(5) if u != v}
    assert ids == set(range(g.m))
    assert all(g.edge_id(u, v) == g.edge_id(v, u) for u in range(5) for v in range(u + 1, 5))
    with pytest.raises(KeyError):
        G.path(3).edge_id(0, 2)
