"""End-to-end run: ingest, dedupe, TF-IDF, consensus sweep, noise removal,
eigengap, consensus k-means + NMF, summaries and exports."""

from __future__ import annotations

import dataclasses
import json
import logging
import shutil
import tempfile
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__, export
from .consensus import (
    ConsensusMatrix,
    NoiseVerdict,
    build_consensus,
    combine_noise,
    default_eps_counts,
    noise_alg1_consensus,
    noise_alg2_dbscan_distance,
    noise_alg3_dbscan_consensus,
    write_consensus_tsv,
)
from .corpus import (
    Document,
    TermDocMatrix,
    Vocabulary,
    build_tdm,
    default_stoplist,
    load_stoplist,
    make_corpus,
    read_texts,
    remove_duplicates,
)
from .dbscan import default_eps_list
from .errors import AllDocumentsEmpty, BadK, ConfigError, StageError, TopicMineError
from .kmeans import kmeans_sweep
from .nmf import ALGORITHMS, FactorPair, NmfConfig, factorize
from .sparsemat import pairwise_cosine_distance
from .spectral import LaplacianResult, analyze
from .topics import TopicSummary, cluster_consensus, summarize

log = logging.getLogger(__name__)


# ---------------------------------------------------------------- config


@dataclass
class InputConfig:
    path: str | None = None
    format: str = "lines"

    def validate(self):
        if self.format not in ("lines", "tsv"):
            raise ConfigError("input.format must be 'lines' or 'tsv'")


@dataclass
class TextConfig:
    stoplists: list[str] | None = None  # None: built-in English + Spanish
    stem: bool = True

    def validate(self):
        pass


@dataclass
class KmeansConfig:
    k_min: int = 2
    k_max: int = 12
    repeats: int = 3
    max_iter: int = 100
    tol: float = 1e-6
    init: str = "forgy"

    def validate(self):
        if not 1 <= self.k_min <= self.k_max:
            raise ConfigError("kmeans needs 1 <= k_min <= k_max")
        if self.repeats < 1 or self.max_iter < 1:
            raise ConfigError("kmeans.repeats and kmeans.max_iter must be >= 1")
        if self.tol < 0:
            raise ConfigError("kmeans.tol must be >= 0")
        if self.init not in ("forgy", "space"):
            raise ConfigError("kmeans.init must be 'forgy' or 'space'")


@dataclass
class DbscanConfig:
    eps_quantiles: tuple[float, float] = (0.05, 0.60)
    num_eps: int = 20
    min_pts: int = 5

    def validate(self):
        lo, hi = self.eps_quantiles
        if not 0 <= lo <= hi <= 1:
            raise ConfigError("dbscan.eps_quantiles must satisfy 0 <= lo <= hi <= 1")
        if self.num_eps < 1 or self.min_pts < 1:
            raise ConfigError("dbscan.num_eps and dbscan.min_pts must be >= 1")


@dataclass
class NoiseConfig:
    enabled: bool = True
    drop_tol: float = 0.10
    threshold: str = "rowsum_mean"
    eps_counts: list[int] | None = None  # None: ceil(runs/4) .. runs

    def validate(self):
        if not 0 <= self.drop_tol < 1:
            raise ConfigError("noise.drop_tol must be in [0, 1)")
        if self.threshold not in ("rowsum_mean", "entry_mean"):
            raise ConfigError("noise.threshold must be 'rowsum_mean' or 'entry_mean'")
        if self.eps_counts is not None and (not self.eps_counts or min(self.eps_counts) < 1):
            raise ConfigError("noise.eps_counts must be a nonempty list of integers >= 1")


@dataclass
class SpectralConfig:
    inspect: int = 50
    normalized: bool = False
    cut: float = 0.5
    min_k: int = 2
    convention: str = "count"
    small: float | None = 0.05

    def validate(self):
        if self.inspect < 2:
            raise ConfigError("spectral.inspect must be >= 2")
        if not 0 <= self.cut < 1:
            raise ConfigError("spectral.cut must be in [0, 1)")
        if self.min_k < 1:
            raise ConfigError("spectral.min_k must be >= 1")
        if self.convention not in ("count", "upper"):
            raise ConfigError("spectral.convention must be 'count' or 'upper'")
        if self.small is not None and not 0 < self.small <= 1:
            raise ConfigError("spectral.small must be in (0, 1]")


@dataclass
class NmfSection:
    algorithm: str = "acls"
    k: Any = "auto"
    lambda_w: float = 0.5
    lambda_h: float = 0.5
    max_iter: int | None = None

    def validate(self):
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"nmf.algorithm must be one of {ALGORITHMS}")
        if self.k != "auto" and not (isinstance(self.k, int) and not isinstance(self.k, bool) and self.k >= 1):
            raise ConfigError("nmf.k must be a positive integer or 'auto'")
        if self.lambda_w < 0 or self.lambda_h < 0:
            raise ConfigError("nmf lambdas must be >= 0")
        if self.max_iter is not None and self.max_iter < 1:
            raise ConfigError("nmf.max_iter must be >= 1")


@dataclass
class TopicsConfig:
    top_terms: int = 20

    def validate(self):
        if self.top_terms < 1:
            raise ConfigError("topics.top_terms must be >= 1")


@dataclass
class ExportConfig:
    edge_threshold: Any = "auto"  # auto: 8 of every 11 runs
    bipartite_cutoff: float = 0.25
    kmeans: bool = True
    nmf: bool = True
    wordcounts: bool = True
    figures: bool = True
    consensus_tsv: bool = False
    factors: bool = False
    timings: bool = False

    def validate(self):
        t = self.edge_threshold
        if t != "auto" and not (isinstance(t, int) and not isinstance(t, bool) and t >= 0):
            raise ConfigError("export.edge_threshold must be an integer >= 0 or 'auto'")
        if not 0 <= self.bipartite_cutoff <= 1:
            raise ConfigError("export.bipartite_cutoff must be in [0, 1]")


_SECTIONS = {
    "input": InputConfig,
    "text": TextConfig,
    "kmeans": KmeansConfig,
    "dbscan": DbscanConfig,
    "noise": NoiseConfig,
    "spectral": SpectralConfig,
    "nmf": NmfSection,
    "topics": TopicsConfig,
    "export": ExportConfig,
}


@dataclass
class PipelineConfig:
    seed: int = 0
    input: InputConfig = field(default_factory=InputConfig)
    text: TextConfig = field(default_factory=TextConfig)
    kmeans: KmeansConfig = field(default_factory=KmeansConfig)
    dbscan: DbscanConfig = field(default_factory=DbscanConfig)
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    spectral: SpectralConfig = field(default_factory=SpectralConfig)
    nmf: NmfSection = field(default_factory=NmfSection)
    topics: TopicsConfig = field(default_factory=TopicsConfig)
    export: ExportConfig = field(default_factory=ExportConfig)

    @classmethod
    def from_dict(cls, data: dict) -> "PipelineConfig":
        data = dict(data)
        cfg = cls()
        if "seed" in data:
            cfg.seed = data.pop("seed")
        for name, raw in data.items():
            if name not in _SECTIONS:
                raise ConfigError(f"unknown config section [{name}]")
            if not isinstance(raw, dict):
                raise ConfigError(f"[{name}] must be a table")
            section_cls = _SECTIONS[name]
            known = {f.name for f in dataclasses.fields(section_cls)}
            bad = set(raw) - known
            if bad:
                raise ConfigError(f"unknown key(s) in [{name}]: {', '.join(sorted(bad))}")
            values = dict(raw)
            if "eps_quantiles" in values:
                values["eps_quantiles"] = tuple(values["eps_quantiles"])
            try:
                setattr(cfg, name, section_cls(**values))
            except TypeError as exc:
                raise ConfigError(f"[{name}]: {exc}") from None
        return cfg

    def validate(self) -> "PipelineConfig":
        if not isinstance(self.seed, int) or isinstance(self.seed, bool) or self.seed < 0:
            raise ConfigError("seed must be a nonnegative integer")
        for name in _SECTIONS:
            try:
                getattr(self, name).validate()
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"[{name}]: {exc}") from None
        return self

    def snapshot(self) -> dict:
        d = dataclasses.asdict(self)
        d["dbscan"]["eps_quantiles"] = list(d["dbscan"]["eps_quantiles"])
        return d


def load_config(path) -> PipelineConfig:
    try:
        import tomllib
    except ModuleNotFoundError:  # python < 3.11
        import tomli as tomllib
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return PipelineConfig.from_dict(data)


# ---------------------------------------------------------------- results


@dataclass
class RunManifest:
    config: dict
    sizes: dict
    chosen_k: int | None = None
    k_source: str | None = None
    suggested_k: int | None = None
    consensus_runs: int | None = None
    edge_threshold: int | None = None
    noise: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)
    outputs: list[str] = field(default_factory=list)
    timings: dict | None = None

    def to_json(self) -> str:
        d = {"version": __version__, **dataclasses.asdict(self)}
        if self.timings is None:
            d.pop("timings")
        return json.dumps(d, indent=2, sort_keys=True) + "\n"


@dataclass
class Prepared:
    """State after noise removal: what the final clustering works on."""

    corpus: list[Document]
    tdm: TermDocMatrix
    vocab: Vocabulary
    consensus: ConsensusMatrix
    sizes: dict
    verdict: NoiseVerdict | None = None
    initial_corpus: list[Document] | None = None
    initial_tdm: TermDocMatrix | None = None


@dataclass
class RunResult:
    manifest: RunManifest
    prepared: Prepared
    spectrum: LaplacianResult
    kmeans_labels: np.ndarray
    factors: FactorPair
    summaries: list[TopicSummary]


class _Timer:
    def __init__(self):
        self.times: dict[str, float] = {}

    @contextmanager
    def stage(self, name):
        t0 = time.perf_counter()
        log.info("stage %s", name)
        try:
            yield
        except (StageError, ConfigError):
            raise
        except (TopicMineError, ValueError, ArithmeticError, OSError, MemoryError) as exc:
            raise StageError(name, exc) from exc
        finally:
            self.times[name] = round(time.perf_counter() - t0, 4)


# ---------------------------------------------------------------- stages


def _tdm_without_empty(docs):
    """TF-IDF matrix, dropping documents left with an all-zero column."""
    docs = [d for d in docs if d.tokens]
    while True:
        if not docs:
            raise AllDocumentsEmpty("no document has any indexable term")
        tdm, vocab = build_tdm(docs)
        empty = set(tdm.empty_columns().tolist())
        if not empty:
            return docs, tdm, vocab
        docs = [d for i, d in enumerate(docs) if i not in empty]


def _sweep(tdm, config: PipelineConfig):
    n = tdm.n
    k_max = min(config.kmeans.k_max, n)
    if config.kmeans.k_min > k_max:
        raise BadK(f"only {n} documents; cannot sweep k from {config.kmeans.k_min}")
    runs = kmeans_sweep(
        tdm.matrix, range(config.kmeans.k_min, k_max + 1), seed=config.seed,
        repeats_per_k=config.kmeans.repeats, max_iter=config.kmeans.max_iter,
        tol=config.kmeans.tol, init=config.kmeans.init,
    )
    return build_consensus(runs)


def load_corpus(config: PipelineConfig, texts=None, ids=None) -> list[Document]:
    if texts is None:
        if config.input.path is None:
            raise ConfigError("no input file given")
        texts, ids = read_texts(config.input.path, config.input.format)
    if not texts:
        raise AllDocumentsEmpty("input contains no documents")
    if config.text.stoplists is None:
        stop = default_stoplist()
    else:
        stop = frozenset().union(*(load_stoplist(p) for p in config.text.stoplists))
    return make_corpus(texts, stop, config.text.stem, ids)


def noise_verdict(C: ConsensusMatrix, tdm: TermDocMatrix, config: PipelineConfig) -> NoiseVerdict:
    nc = config.noise
    f1 = noise_alg1_consensus(C, nc.drop_tol, nc.threshold)
    D = pairwise_cosine_distance(tdm)
    eps = default_eps_list(D, config.dbscan.eps_quantiles, config.dbscan.num_eps)
    f2 = noise_alg2_dbscan_distance(D, eps, config.dbscan.min_pts)
    counts = nc.eps_counts if nc.eps_counts is not None else default_eps_counts(C.runs)
    counts = [c for c in counts if c <= C.runs] or [C.runs]
    f3 = noise_alg3_dbscan_consensus(C, counts, config.dbscan.min_pts)
    return combine_noise(f1, f2, f3)


def prepare(config: PipelineConfig, texts=None, ids=None, timer: _Timer | None = None) -> Prepared:
    """Run everything up to and including noise removal and the second sweep."""
    timer = timer or _Timer()
    with timer.stage("ingest"):
        docs = load_corpus(config, texts, ids)
    sizes = {"ingested": len(docs)}
    with timer.stage("dedupe"):
        docs, _ = remove_duplicates(docs)
    sizes["after_dedupe"] = len(docs)
    with timer.stage("tfidf"):
        docs, tdm, vocab = _tdm_without_empty(docs)
    sizes["after_empty_removal"] = len(docs)
    with timer.stage("sweep"):
        C = _sweep(tdm, config)
    if not config.noise.enabled:
        sizes["after_noise"] = len(docs)
        return Prepared(docs, tdm, vocab, C, sizes, None, docs, tdm)
    with timer.stage("noise"):
        verdict = noise_verdict(C, tdm, config)
        kept = [docs[i] for i in verdict.kept()]
        if not kept:
            raise AllDocumentsEmpty("noise removal discarded every document")
    with timer.stage("tfidf_after_noise"):
        kept, tdm2, vocab2 = _tdm_without_empty(kept)
    sizes["after_noise"] = len(kept)
    with timer.stage("sweep_after_noise"):
        C2 = _sweep(tdm2, config)
    return Prepared(kept, tdm2, vocab2, C2, sizes, verdict, docs, tdm)


def spectrum(prep: Prepared, config: PipelineConfig) -> LaplacianResult:
    sc = config.spectral
    return analyze(prep.consensus, sc.inspect, sc.normalized, sc.min_k, sc.convention, sc.cut, sc.small)


def edge_threshold(config: PipelineConfig, runs: int) -> int:
    t = config.export.edge_threshold
    if t == "auto":
        return (8 * runs) // 11
    return int(t)


def run_pipeline(config: PipelineConfig, out_dir=None, texts=None, ids=None) -> RunResult:
    """Run every stage; write outputs to ``out_dir`` if given.

    Outputs are assembled in a scratch directory next to ``out_dir`` and moved
    in only after every stage succeeded, so a failed run leaves nothing.
    """
    config.validate()
    timer = _Timer()
    prep = prepare(config, texts, ids, timer)
    n = len(prep.corpus)

    with timer.stage("eigengap"):
        spec = spectrum(prep, config)
    if config.nmf.k == "auto":
        k, source = spec.suggested_k, "eigengap"
    else:
        k, source = int(config.nmf.k), "config"
    if not 1 <= k <= min(n, prep.tdm.m):
        raise StageError("eigengap", BadK(f"k={k} outside [1, {min(n, prep.tdm.m)}]"))

    with timer.stage("consensus_kmeans"):
        km = cluster_consensus(prep.consensus, k, seed=config.seed,
                               max_iter=config.kmeans.max_iter, tol=config.kmeans.tol)
    with timer.stage("nmf"):
        ncfg = NmfConfig(config.nmf.algorithm, config.nmf.max_iter, config.seed,
                         config.nmf.lambda_w, config.nmf.lambda_h)
        fp = factorize(prep.tdm, k, ncfg)
    with timer.stage("summaries"):
        summaries = summarize(prep.corpus, fp.W, fp.H, prep.vocab, config.topics.top_terms)

    threshold = edge_threshold(config, prep.consensus.runs)
    verdict = prep.verdict
    manifest = RunManifest(
        config=config.snapshot(),
        sizes=prep.sizes,
        chosen_k=int(k),
        k_source=source,
        suggested_k=int(spec.suggested_k),
        consensus_runs=int(prep.consensus.runs),
        edge_threshold=int(threshold),
        noise={} if verdict is None else {
            "alg1": int(verdict.alg1.sum()), "alg2": int(verdict.alg2.sum()),
            "alg3": int(verdict.alg3.sum()), "combined": int(verdict.combined.sum()),
        },
        details={
            "vocabulary_size": prep.tdm.m,
            "kmeans_cluster_sizes": [int(x) for x in km.sizes()],
            "kmeans_residual": int(km.meta.get("residual", 0)),
            "nmf_algorithm": fp.algorithm,
            "nmf_iterations": len(fp.history),
            "nmf_final_error": float(f"{fp.history[-1]:.10g}") if fp.history else None,
            "nmf_topic_sizes": [len(s.member_docs) for s in summaries],
        },
    )
    result = RunResult(manifest, prep, spec, km.labels, fp, summaries)
    if out_dir is not None:
        with timer.stage("export"):
            _write_outputs(result, config, Path(out_dir), timer)
    return result


def _write_outputs(result: RunResult, config: PipelineConfig, out: Path, timer: _Timer):
    out.parent.mkdir(parents=True, exist_ok=True)
    tmp = Path(tempfile.mkdtemp(prefix=".mine-partial-", dir=out.parent))
    try:
        _write_all(result, config, tmp)
        if config.export.timings:
            result.manifest.timings = dict(timer.times)
        files = sorted(p.relative_to(tmp).as_posix() for p in tmp.rglob("*") if p.is_file())
        result.manifest.outputs = sorted(files + ["manifest.json"])
        (tmp / "manifest.json").write_text(result.manifest.to_json(), encoding="utf-8")
        out.mkdir(parents=True, exist_ok=True)
        for item in sorted(tmp.iterdir()):
            dest = out / item.name
            if dest.is_dir():
                shutil.rmtree(dest)
            elif dest.exists():
                dest.unlink()
            shutil.move(str(item), str(dest))
    finally:
        shutil.rmtree(tmp, ignore_errors=True)


def _write_all(result: RunResult, config: PipelineConfig, out: Path):
    prep = result.prepared
    ec = config.export
    doc_ids = [d.id for d in prep.corpus]
    summaries = result.summaries
    k = result.manifest.chosen_k

    export.write_topics_tsv(summaries, out / "topics.tsv")
    export.write_members_tsv(summaries, out / "members.tsv")
    export.write_eigenvalues_tsv(result.spectrum, out / "eigenvalues.tsv")
    by_id = {d.id: d for d in prep.corpus}
    (out / "report.txt").write_text(export.format_report(summaries, by_id), encoding="utf-8")

    with open(out / "clusters.tsv", "w", encoding="utf-8", newline="\n") as fh:
        fh.write("doc_id\tkmeans_cluster\tnmf_topic\n")
        nmf_labels = np.full(len(doc_ids), -1)
        pos = {d: i for i, d in enumerate(doc_ids)}
        for s in summaries:
            for d in s.member_docs:
                nmf_labels[pos[d]] = s.topic_id
        for did, a, b in zip(doc_ids, result.kmeans_labels, nmf_labels):
            fh.write(f"{did}\t{a}\t{b}\n")

    if prep.verdict is not None:
        v = prep.verdict
        with open(out / "noise.tsv", "w", encoding="utf-8", newline="\n") as fh:
            fh.write("doc_id\talg1\talg2\talg3\tremoved\n")
            for i, d in enumerate(prep.initial_corpus):
                fh.write(f"{d.id}\t{int(v.alg1[i])}\t{int(v.alg2[i])}\t{int(v.alg3[i])}\t{int(v.combined[i])}\n")

    if ec.kmeans:
        export.export_gexf_consensus(prep.consensus, result.kmeans_labels,
                                     result.manifest.edge_threshold, out / "consensus.gexf", doc_ids)
    if ec.nmf:
        labels = [", ".join(t for t, _ in s.top_terms[:3]) for s in summaries]
        export.export_gexf_bipartite(result.factors.H, ec.bipartite_cutoff, out / "nmf_bipartite.gexf",
                                     doc_ids, labels)
    if ec.wordcounts:
        export.export_wordcounts(prep.corpus, nmf_labels, out / "wordcounts", "nmf_topic", k)
        export.export_wordcounts(prep.corpus, result.kmeans_labels, out / "wordcounts", "kmeans_cluster", k)
    if ec.consensus_tsv:
        write_consensus_tsv(prep.consensus, out / "consensus.tsv", 0)
    if ec.factors:
        export.write_factors_tsv(result.factors.W, result.factors.H, prep.vocab.terms, doc_ids, out)
    if ec.figures:
        from . import plotting

        fig = out / "figures"
        fig.mkdir()
        plotting.plot_eigenvalues(result.spectrum, fig / "eigenvalues.png")
        plotting.plot_consensus(prep.consensus, result.kmeans_labels, fig / "consensus.png")
        plotting.plot_topic_terms(summaries, fig / "topic_terms.png")
        if prep.verdict is not None:
            plotting.plot_noise(prep.initial_tdm, prep.verdict.combined, fig / "noise.png",
                                nmf_labels)
