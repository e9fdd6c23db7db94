"""File exporters: GEXF graphs for Gephi, word-count tables, topic TSVs."""

from __future__ import annotations

import colorsys
import xml.etree.ElementTree as ET
from collections import Counter
from pathlib import Path
from typing import Sequence

import numpy as np

from .consensus import ConsensusMatrix, consensus_edges
from .corpus import Document
from .topics import UNASSIGNED, TopicSummary, assign_topics

GEXF_NS = "http://gexf.net/1.2"
VIZ_NS = "http://gexf.net/1.2/viz"


def _palette(k):
    out = []
    for i in range(max(k, 1)):
        r, g, b = colorsys.hsv_to_rgb(i / max(k, 1), 0.65, 0.9)
        out.append((int(r * 255), int(g * 255), int(b * 255)))
    return out


def _gexf_root(attrs, edge_attrs=()):
    ET.register_namespace("", GEXF_NS)
    ET.register_namespace("viz", VIZ_NS)
    root = ET.Element(f"{{{GEXF_NS}}}gexf", {"version": "1.2"})
    meta = ET.SubElement(root, f"{{{GEXF_NS}}}meta")
    ET.SubElement(meta, f"{{{GEXF_NS}}}creator").text = "topicmine"
    graph = ET.SubElement(root, f"{{{GEXF_NS}}}graph", {"defaultedgetype": "undirected", "mode": "static"})
    node_attrs = ET.SubElement(graph, f"{{{GEXF_NS}}}attributes", {"class": "node"})
    for i, (title, typ) in enumerate(attrs):
        ET.SubElement(node_attrs, f"{{{GEXF_NS}}}attribute", {"id": str(i), "title": title, "type": typ})
    if edge_attrs:
        ea = ET.SubElement(graph, f"{{{GEXF_NS}}}attributes", {"class": "edge"})
        for i, (title, typ) in enumerate(edge_attrs):
            ET.SubElement(ea, f"{{{GEXF_NS}}}attribute", {"id": str(i), "title": title, "type": typ})
    return root, graph


def _node(nodes, node_id, label, values, color=None):
    el = ET.SubElement(nodes, f"{{{GEXF_NS}}}node", {"id": node_id, "label": label})
    av = ET.SubElement(el, f"{{{GEXF_NS}}}attvalues")
    for i, v in enumerate(values):
        ET.SubElement(av, f"{{{GEXF_NS}}}attvalue", {"for": str(i), "value": str(v)})
    if color is not None:
        r, g, b = color
        ET.SubElement(el, f"{{{VIZ_NS}}}color", {"r": str(r), "g": str(g), "b": str(b)})
    return el


def _write_xml(root, path):
    ET.indent(root, space="  ")
    tree = ET.ElementTree(root)
    with open(path, "wb") as fh:
        tree.write(fh, encoding="UTF-8", xml_declaration=True)
        fh.write(b"\n")


def _fmt(x: float) -> str:
    return f"{x:.10g}"


def export_gexf_consensus(C: ConsensusMatrix, labels, threshold: int, path,
                          doc_ids: Sequence[int] | None = None) -> int:
    """Consensus graph: an edge joins two documents co-clustered more than
    ``threshold`` times. Every document is a node, connected or not.

    Returns the number of edges written.
    """
    if threshold < 0:
        raise ValueError("threshold must be >= 0")
    labels = np.asarray(getattr(labels, "labels", labels))
    doc_ids = list(range(C.n)) if doc_ids is None else list(doc_ids)
    k = int(labels.max()) + 1 if labels.size else 0
    colors = _palette(k)
    root, graph = _gexf_root([("cluster", "integer")])
    nodes = ET.SubElement(graph, f"{{{GEXF_NS}}}nodes")
    for i, did in enumerate(doc_ids):
        lab = int(labels[i])
        _node(nodes, str(did), f"doc {did}", [lab], colors[lab] if lab >= 0 else (160, 160, 160))
    edges = ET.SubElement(graph, f"{{{GEXF_NS}}}edges")
    count = 0
    for i, j, c in consensus_edges(C, threshold):
        ET.SubElement(edges, f"{{{GEXF_NS}}}edge", {
            "id": str(count), "source": str(doc_ids[i]), "target": str(doc_ids[j]), "weight": str(c),
        })
        count += 1
    _write_xml(root, path)
    return count


def export_gexf_bipartite(H, cutoff: float, path, doc_ids: Sequence[int] | None = None,
                          topic_labels: Sequence[str] | None = None, labels=None) -> int:
    """Document-topic graph from NMF weights.

    Document ``d`` links to topic ``j`` when ``H[j, d] / max_j H[j, d] >=
    cutoff``; the edge weight is ``H[j, d]``. Returns the number of edges.
    """
    if not 0 <= cutoff <= 1:
        raise ValueError("cutoff must be in [0, 1]")
    H = np.asarray(H)
    k, n = H.shape
    if labels is None:
        labels = assign_topics(H)
    doc_ids = list(range(n)) if doc_ids is None else list(doc_ids)
    topic_labels = [f"topic {j}" for j in range(k)] if topic_labels is None else list(topic_labels)
    colors = _palette(k)
    root, graph = _gexf_root([("kind", "string"), ("topic", "integer")])
    nodes = ET.SubElement(graph, f"{{{GEXF_NS}}}nodes")
    for j in range(k):
        _node(nodes, f"t{j}", topic_labels[j], ["topic", j], colors[j])
    for d, did in enumerate(doc_ids):
        lab = int(labels[d])
        _node(nodes, f"d{did}", f"doc {did}", ["document", lab],
              colors[lab] if lab != UNASSIGNED else (160, 160, 160))
    edges = ET.SubElement(graph, f"{{{GEXF_NS}}}edges")
    colmax = H.max(axis=0)
    count = 0
    for d, did in enumerate(doc_ids):
        if colmax[d] <= 0:
            continue
        for j in range(k):
            if H[j, d] > 0 and H[j, d] / colmax[d] >= cutoff:
                ET.SubElement(edges, f"{{{GEXF_NS}}}edge", {
                    "id": str(count), "source": f"d{did}", "target": f"t{j}", "weight": _fmt(H[j, d]),
                })
                count += 1
    _write_xml(root, path)
    return count


def word_counts(docs: Sequence[Document]) -> list[tuple[str, int]]:
    counts = Counter(t for d in docs for t in d.tokens)
    return sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))


def export_wordcounts(corpus: Sequence[Document], labels, directory, prefix: str = "topic",
                      k: int | None = None) -> list[Path]:
    """One ``term<TAB>count`` file per cluster, counts over member documents.

    ``labels[i]`` is the cluster of ``corpus[i]``; clusters ``0..k-1`` all get
    a file, empty ones just the header.
    """
    labels = np.asarray(labels)
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    if k is None:
        k = int(labels.max()) + 1 if labels.size else 0
    paths = []
    for j in range(k):
        members = [corpus[i] for i in np.flatnonzero(labels == j)]
        path = directory / f"{prefix}_{j}.tsv"
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("term\tcount\n")
            for term, c in word_counts(members):
                fh.write(f"{term}\t{c}\n")
        paths.append(path)
    return paths


def write_topics_tsv(summaries: Sequence[TopicSummary], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("topic_id\trank\tterm\tweight\n")
        for s in summaries:
            for rank, (term, w) in enumerate(s.top_terms, 1):
                fh.write(f"{s.topic_id}\t{rank}\t{term}\t{_fmt(w)}\n")


def write_members_tsv(summaries: Sequence[TopicSummary], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("topic_id\tdoc_id\tis_sentence\n")
        for s in summaries:
            for did in s.member_docs:
                fh.write(f"{s.topic_id}\t{did}\t{int(did == s.topic_sentence)}\n")


def write_eigenvalues_tsv(result, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("position\teigenvalue\tgap_to_next\n")
        for pos, ev, gap in result.gap_table():
            fh.write(f"{pos}\t{_fmt(ev)}\t{'' if np.isnan(gap) else _fmt(gap)}\n")


def write_factors_tsv(W, H, vocab_terms, doc_ids, directory) -> None:
    directory = Path(directory)
    k = W.shape[1]
    header = "\t".join(f"topic_{j}" for j in range(k))
    with open(directory / "W.tsv", "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"term\t{header}\n")
        for term, row in zip(vocab_terms, W):
            fh.write(term + "\t" + "\t".join(_fmt(x) for x in row) + "\n")
    with open(directory / "H.tsv", "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"doc_id\t{header}\n")
        for did, col in zip(doc_ids, H.T):
            fh.write(f"{did}\t" + "\t".join(_fmt(x) for x in col) + "\n")


def format_report(summaries: Sequence[TopicSummary], corpus_by_id: dict, n_terms: int = 10) -> str:
    lines = []
    for s in summaries:
        terms = ", ".join(t for t, _ in s.top_terms[:n_terms])
        lines.append(f"Topic {s.topic_id} ({len(s.member_docs)} documents)")
        lines.append(f"  top terms: {terms}")
        if s.topic_sentence is not None:
            lines.append(f"  topic sentence [{s.topic_sentence}]: {corpus_by_id[s.topic_sentence].raw}")
        else:
            lines.append("  topic sentence: none (empty topic)")
        lines.append("")
    return "\n".join(lines)
