"""``mine`` command line: run, eigs, noise, synth.

Exit codes: 0 success, 1 configuration error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from .errors import ConfigError, TopicMineError

log = logging.getLogger("topicmine")

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; bad usage is a config error here
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _k_value(text):
    if text == "auto":
        return "auto"
    try:
        k = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("expected a positive integer or 'auto'") from None
    if k < 1:
        raise argparse.ArgumentTypeError("k must be >= 1")
    return k


def _common(p):
    p.add_argument("--config", type=Path, help="TOML configuration file")
    p.add_argument("--input", help="input file (overrides input.path)")
    p.add_argument("--input-format", choices=("lines", "tsv"), help="one document per line, or id<TAB>text")
    p.add_argument("--seed", type=int, help="master random seed (overrides seed)")
    p.add_argument("--strict-repro", action="store_true", help="refuse to run without an explicit --seed")
    p.add_argument("-v", "--verbose", action="count", default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mine", description="Topic discovery in short-text corpora.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", help="full pipeline with exports")
    _common(p)
    p.add_argument("--k", type=_k_value, help="number of topics, or 'auto' for the eigengap choice")
    p.add_argument("--out", type=Path, default=Path("mine-out"), help="output directory")
    p.add_argument("--algorithm", choices=("mu", "als", "acls"), help="NMF solver (overrides nmf.algorithm)")
    p.add_argument("--no-figures", action="store_true", help="skip the PNG figures")
    p.add_argument("--timings", action="store_true", help="record stage wall times in the manifest")

    p = sub.add_parser("eigs", help="Laplacian spectrum and gap table only")
    _common(p)
    p.add_argument("--inspect", type=int, help="number of smallest eigenvalues (overrides spectral.inspect)")
    p.add_argument("--eigs-out", type=Path, help="also write the table as TSV")
    p.add_argument("--plot", type=Path, help="also write an eigenvalue plot (PNG)")

    p = sub.add_parser("noise", help="noise-removal report only")
    _common(p)
    p.add_argument("--report", type=Path, help="write per-document verdicts as TSV")

    p = sub.add_parser("synth", help="write a planted-topic demo corpus")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--docs", type=int, default=2000)
    p.add_argument("--topics", type=int, default=9)
    p.add_argument("--scatter", type=float, default=0.0, help="fraction of unstructured documents")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--labels", type=Path, help="also write the planted labels, one per line")
    p.add_argument("-v", "--verbose", action="count", default=0)
    return parser


def _config(args):
    from .pipeline import PipelineConfig, load_config

    cfg = load_config(args.config) if args.config else PipelineConfig()
    if args.strict_repro and args.seed is None:
        raise ConfigError("--strict-repro requires --seed")
    if args.seed is not None:
        cfg.seed = args.seed
    if args.input is not None:
        cfg.input.path = args.input
    if args.input_format is not None:
        cfg.input.format = args.input_format
    if getattr(args, "k", None) is not None:
        cfg.nmf.k = args.k
    if getattr(args, "algorithm", None):
        cfg.nmf.algorithm = args.algorithm
    if getattr(args, "no_figures", False):
        cfg.export.figures = False
    if getattr(args, "timings", False):
        cfg.export.timings = True
    if getattr(args, "inspect", None) is not None:
        cfg.spectral.inspect = args.inspect
    if cfg.input.path is None:
        raise ConfigError("no input: pass --input or set input.path")
    if not Path(cfg.input.path).is_file():
        raise ConfigError(f"input file not found: {cfg.input.path}")
    return cfg.validate()


def format_gap_table(result, rows: int | None = None) -> str:
    table = result.gap_table()
    if rows is not None:
        table = table[:rows]
    lines = [f"{'pos':>4}  {'eigenvalue':>14}  {'gap to next':>14}"]
    for pos, ev, gap in table:
        mark = "  <- largest gap" if result.gap_index is not None and pos == result.gap_index + 1 else ""
        gap_s = "" if np.isnan(gap) else f"{gap:14.6g}"
        lines.append(f"{pos:>4}  {ev:14.6g}  {gap_s:>14}{mark}")
    return "\n".join(lines)


def _cmd_run(args):
    from .export import format_report
    from .pipeline import run_pipeline

    cfg = _config(args)
    result = run_pipeline(cfg, args.out)
    m = result.manifest
    print(f"documents: {m.sizes['ingested']} ingested, {m.sizes['after_dedupe']} after dedupe, "
          f"{m.sizes['after_noise']} after noise removal")
    print(f"k = {m.chosen_k} ({m.k_source}; eigengap suggests {m.suggested_k})")
    print(format_gap_table(result.spectrum, rows=min(15, len(result.spectrum.eigenvalues))))
    print()
    by_id = {d.id: d for d in result.prepared.corpus}
    print(format_report(result.summaries, by_id))
    print(f"outputs written to {args.out}")
    return EXIT_OK


def _cmd_eigs(args):
    from .export import write_eigenvalues_tsv
    from .pipeline import prepare, spectrum

    cfg = _config(args)
    prep = prepare(cfg)
    res = spectrum(prep, cfg)
    print(f"{len(prep.corpus)} documents, consensus over {prep.consensus.runs} runs")
    print(format_gap_table(res))
    print(f"suggested k = {res.suggested_k}")
    if args.eigs_out:
        write_eigenvalues_tsv(res, args.eigs_out)
    if args.plot:
        from .plotting import plot_eigenvalues

        plot_eigenvalues(res, args.plot)
    return EXIT_OK


def _cmd_noise(args):
    from .pipeline import prepare

    cfg = _config(args)
    cfg.noise.enabled = True
    prep = prepare(cfg)
    v = prep.verdict
    n = len(v.combined)
    print(f"{n} documents considered")
    for name, flags in (("algorithm 1 (consensus row sums)", v.alg1),
                        ("algorithm 2 (DBSCAN on distances)", v.alg2),
                        ("algorithm 3 (DBSCAN on consensus)", v.alg3),
                        ("combined (2 of 3)", v.combined)):
        print(f"  {name:<36} {int(flags.sum()):>7} flagged")
    print(f"{prep.sizes['after_noise']} documents kept")
    if args.report:
        with open(args.report, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("doc_id\talg1\talg2\talg3\tremoved\n")
            for i, d in enumerate(prep.initial_corpus):
                fh.write(f"{d.id}\t{int(v.alg1[i])}\t{int(v.alg2[i])}\t{int(v.alg3[i])}\t{int(v.combined[i])}\n")
    return EXIT_OK


def _cmd_synth(args):
    from .synthetic import planted_corpus

    if args.docs < 1 or args.topics < 1 or not 0 <= args.scatter < 1:
        raise ConfigError("need --docs >= 1, --topics >= 1 and 0 <= --scatter < 1")
    pc = planted_corpus(n_docs=args.docs, n_topics=args.topics, scatter_fraction=args.scatter, seed=args.seed)
    args.out.write_text("\n".join(pc.texts) + "\n", encoding="utf-8")
    if args.labels:
        args.labels.write_text("\n".join(str(x) for x in pc.labels) + "\n", encoding="utf-8")
    print(f"wrote {len(pc.texts)} documents to {args.out}")
    return EXIT_OK


_COMMANDS = {"run": _cmd_run, "eigs": _cmd_eigs, "noise": _cmd_noise, "synth": _cmd_synth}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"mine: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (TopicMineError, OSError, ValueError) as exc:
        print(f"mine: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
