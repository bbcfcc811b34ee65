"""End-to-end smoke of the python bindings: every major operation once."""

import pytest

import flowmine as fm

CATALOG_TEXT = """\
# three-hop request/response
start: 1
end: 3
1,CPU,Cache,read_req
2,Cache,Mem,mem_rd
3,Mem,CPU,rd_data
"""


@pytest.fixture(scope="module")
def catalog():
    return fm.parse_catalog(CATALOG_TEXT)


@pytest.fixture(scope="module")
def corpus(catalog):
    flow = fm.FlowSpec("abc", 1, {3}, {(1, 2), (2, 3)})
    cfg = fm.GenConfig()
    cfg.cores = 2
    cfg.runs = 6
    cfg.seed = 5
    return fm.generate_corpus([flow], cfg, 20)


def test_catalog_round_trip(catalog):
    assert len(catalog) == 3
    assert catalog.at(2).src == "Cache"
    assert catalog.start_ids() == [1]
    again = fm.parse_catalog(fm.serialize_catalog(catalog))
    assert again == catalog


def test_parse_error_is_flowmine_error():
    with pytest.raises(fm.Error):
        fm.parse_catalog("not,a,valid\ncatalog")


def test_generate_is_deterministic(corpus, catalog):
    flow = fm.FlowSpec("abc", 1, {3}, {(1, 2), (2, 3)})
    cfg = fm.GenConfig()
    cfg.cores = 2
    cfg.runs = 6
    cfg.seed = 5
    assert fm.generate([flow], cfg) == corpus[0]
    assert len(corpus[0]) == 18  # 6 runs x 3 events
    text = fm.serialize_traces(corpus)
    assert fm.parse_traces(text, catalog) == corpus


def test_expected_run_length():
    flow = fm.FlowSpec("abc", 1, {3}, {(1, 2), (2, 3)})
    assert fm.expected_run_length(flow) == pytest.approx(3.0)


def test_causality_graph(catalog):
    g = fm.build_graph(catalog, fm.Predicate.UNION)
    assert g.has_edge(1, 2) and g.has_edge(2, 3)
    sub = fm.reachable_subgraph(g, 1, 3)
    assert sub.nodes == [1, 2, 3]
    assert "digraph" in fm.graph_to_dot(g, catalog)
    with pytest.raises(fm.Error):
        fm.reachable_subgraph(g, 99, 3)


def test_slicing(catalog, corpus):
    slices = fm.causality_slice(corpus[0], catalog)
    assert sum(len(s) for s in slices) == len(corpus[0])


def test_mine_with_ngram(catalog, corpus):
    scorer = fm.train_ngram(corpus, catalog, order=2, smoothing=0.0)
    assert scorer.family == "ngram"
    assert fm.next_score(scorer, corpus, 1, 2) > 0.2
    g = fm.build_graph(catalog)
    result = fm.mine(g, scorer, corpus, catalog, fm.MineOptions())
    assert len(result.flows) == 1
    mined = fm.to_flowspec(result.flows[0], "mined")
    assert mined.edges == [(1, 2), (2, 3)]


def test_attention_train_and_io(catalog, corpus, tmp_path):
    cfg = fm.ModelConfig()
    cfg.layers = 1
    cfg.heads = 2
    cfg.dim = 16
    cfg.window = 8
    cfg.epochs = 10
    cfg.seed = 3
    scorer = fm.train(corpus, catalog, cfg)
    assert scorer.family == "attention"
    assert len(scorer.epoch_losses) == 10
    dist = scorer.score([1, 2, 3], 1)
    assert sum(dist) == pytest.approx(1.0, abs=1e-6)

    path = str(tmp_path / "model.fmlm")
    fm.save_scorer(scorer, path)
    loaded = fm.load_scorer(path)
    assert loaded.score([1, 2, 3], 1) == dist


def test_evaluate_policies(catalog, corpus):
    flow = fm.FlowSpec("abc", 1, {3}, {(1, 2), (2, 3)})
    oracle = fm.evaluate_oracle([flow], corpus[0])
    assert oracle.rate == 1.0
    assert oracle.exact
    greedy = fm.evaluate_greedy([flow], fm.Trace([1, 2, 3, 2]))
    assert greedy.accepted == 3
    assert greedy.rejected_indices == [3]


def test_compare_flows():
    truth = fm.FlowSpec("t", 1, {3}, {(1, 2), (2, 3)})
    mined = fm.FlowSpec("m", 1, {3}, {(1, 2), (2, 3), (1, 3)})
    cmp = fm.compare_flows([mined], [truth])
    assert cmp.matches[0].edge_recall == 1.0
    assert cmp.matches[0].spurious == [(1, 3)]


def test_flow_file_round_trip(catalog):
    flow = fm.FlowSpec("abc", 1, {3}, {(1, 2), (2, 3)})
    text = fm.serialize_flows([flow])
    back = fm.parse_flows(text, catalog)
    assert back == [flow]
    assert "msg_1" in fm.flow_to_dot(flow, catalog)
