import xml.etree.ElementTree as ET
from collections import Counter

import numpy as np
import pytest

from topicmine.consensus import ConsensusMatrix
from topicmine.corpus import make_corpus
from topicmine.export import (
    GEXF_NS,
    export_gexf_bipartite,
    export_gexf_consensus,
    export_wordcounts,
    write_eigenvalues_tsv,
    write_members_tsv,
    write_topics_tsv,
)
from topicmine.spectral import analyze
from topicmine.synthetic import block_consensus
from topicmine.topics import TopicSummary

NS = {"g": GEXF_NS}


def parse(path):
    root = ET.parse(path).getroot()
    nodes = root.findall("g:graph/g:nodes/g:node", NS)
    edges = root.findall("g:graph/g:edges/g:edge", NS)
    return root, nodes, edges


def test_consensus_block_model_edges(tmp_path):
    counts, labels = block_consensus([4, 3, 5], runs=11)
    C = ConsensusMatrix(counts, 11)
    p = tmp_path / "c.gexf"
    n_edges = export_gexf_consensus(C, labels, 8, p)
    root, nodes, edges = parse(p)
    assert root.get("version") == "1.2"
    assert len(nodes) == 12
    assert n_edges == len(edges) == 6 + 3 + 10
    for e in edges:
        s, t = int(e.get("source")), int(e.get("target"))
        assert labels[s] == labels[t]
        assert e.get("weight") == "11"


def test_consensus_threshold_semantics(tmp_path):
    counts = np.array([[5, 5, 4, 0], [5, 5, 1, 0], [4, 1, 5, 0], [0, 0, 0, 5]])
    C = ConsensusMatrix(counts, 5)
    p = tmp_path / "c.gexf"
    # only pairs together in every run
    assert export_gexf_consensus(C, [0, 0, 0, 1], 4, p) == 1
    assert export_gexf_consensus(C, [0, 0, 0, 1], 5, p) == 0
    assert export_gexf_consensus(C, [0, 0, 0, 1], 0, p) == 3
    _, nodes, _ = parse(p)
    # the isolated node is kept
    assert len(nodes) == 4
    with pytest.raises(ValueError):
        export_gexf_consensus(C, [0, 0, 0, 1], -1, p)


def test_consensus_doc_ids_and_attributes(tmp_path):
    counts, labels = block_consensus([2, 2], runs=3)
    p = tmp_path / "c.gexf"
    export_gexf_consensus(ConsensusMatrix(counts, 3), labels, 1, p, doc_ids=[10, 11, 20, 21])
    _, nodes, edges = parse(p)
    assert [n.get("id") for n in nodes] == ["10", "11", "20", "21"]
    values = [n.find("g:attvalues/g:attvalue", NS).get("value") for n in nodes]
    assert values == ["0", "0", "1", "1"]
    assert {(e.get("source"), e.get("target")) for e in edges} == {("10", "11"), ("20", "21")}


def test_bipartite_cutoffs(tmp_path):
    rng = np.random.default_rng(0)
    H = rng.random((3, 15))
    H[:, 4] = 0.0
    H[1, 7] = 0.0
    p = tmp_path / "b.gexf"
    assert export_gexf_bipartite(H, 1.0, p) == 14  # one per non-zero column
    _, nodes, edges = parse(p)
    assert len(nodes) == 3 + 15
    assert export_gexf_bipartite(H, 0.0, p) == int((H > 0).sum())
    with pytest.raises(ValueError):
        export_gexf_bipartite(H, 1.5, p)


def test_bipartite_shared_documents(tmp_path):
    # documents 0-2 load on topic 0, 3-5 on topic 1, 6-7 on both
    H = np.array([
        [1.0, 0.9, 0.8, 0.0, 0.1, 0.0, 0.6, 0.5],
        [0.0, 0.1, 0.0, 1.0, 0.9, 0.8, 0.5, 0.6],
    ])
    p = tmp_path / "b.gexf"
    export_gexf_bipartite(H, 0.5, p)
    _, _, edges = parse(p)
    targets = {}
    for e in edges:
        targets.setdefault(e.get("source"), set()).add(e.get("target"))
    assert targets["d6"] == targets["d7"] == {"t0", "t1"}
    assert all(len(targets[f"d{i}"]) == 1 for i in range(6))
    w = {(e.get("source"), e.get("target")): float(e.get("weight")) for e in edges}
    assert w[("d6", "t1")] == 0.5


def test_wordcounts_single_term(tmp_path):
    corpus = make_corpus(["cup"] * 4 + ["goal"], stoplist=(), stem=False)
    paths = export_wordcounts(corpus, [0, 0, 0, 0, 2], tmp_path, "c")
    assert paths[0].read_text() == "term\tcount\ncup\t4\n"
    assert paths[1].read_text() == "term\tcount\n"  # empty cluster
    assert paths[2].read_text() == "term\tcount\ngoal\t1\n"


def test_wordcounts_match_recount(tmp_path):
    rng = np.random.default_rng(2)
    words = ["alpha", "beta", "gamma", "delta", "eps"]
    texts = [" ".join(rng.choice(words, rng.integers(1, 8))) for _ in range(40)]
    corpus = make_corpus(texts, stoplist=(), stem=False)
    labels = rng.integers(0, 3, 40)
    export_wordcounts(corpus, labels, tmp_path, "k", 3)
    for j in range(3):
        expected = Counter()
        for d, lab in zip(corpus, labels):
            if lab == j:
                for t in d.tokens:
                    expected[t] += 1
        lines = (tmp_path / f"k_{j}.tsv").read_text().splitlines()
        got = {t: int(c) for t, c in (ln.split("\t") for ln in lines[1:])}
        assert got == dict(expected)
        counts = [int(ln.split("\t")[1]) for ln in lines[1:]]
        assert counts == sorted(counts, reverse=True)


def test_topic_tables(tmp_path):
    summaries = [
        TopicSummary(0, (("cup", 0.9), ("goal", 0.5)), (3, 5), 5),
        TopicSummary(1, (("vote", 0.7),), (), None),
    ]
    write_topics_tsv(summaries, tmp_path / "t.tsv")
    write_members_tsv(summaries, tmp_path / "m.tsv")
    assert (tmp_path / "t.tsv").read_text().splitlines() == [
        "topic_id\trank\tterm\tweight", "0\t1\tcup\t0.9", "0\t2\tgoal\t0.5", "1\t1\tvote\t0.7",
    ]
    assert (tmp_path / "m.tsv").read_text().splitlines() == [
        "topic_id\tdoc_id\tis_sentence", "0\t3\t0", "0\t5\t1",
    ]


def test_eigenvalue_table(tmp_path):
    counts, _ = block_consensus([3, 3], runs=2)
    write_eigenvalues_tsv(analyze(counts, 4), tmp_path / "e.tsv")
    lines = (tmp_path / "e.tsv").read_text().splitlines()
    assert lines[0] == "position\teigenvalue\tgap_to_next"
    assert len(lines) == 5 and lines[-1].endswith("\t")


def test_gexf_is_deterministic(tmp_path):
    counts, labels = block_consensus([5, 5], runs=7, flip=0.2, seed=1)
    a, b = tmp_path / "a.gexf", tmp_path / "b.gexf"
    export_gexf_consensus(ConsensusMatrix(counts, 7), labels, 3, a)
    export_gexf_consensus(ConsensusMatrix(counts, 7), labels, 3, b)
    assert a.read_bytes() == b.read_bytes()
