"""Command-line front end: one executable, one subcommand per pipeline stage.

Exit status is 0 on success, 1 when an input violates a contract (bad
lexicon, malformed corpus, failed gradient check, ...) and 2 on bad usage.
"""

from __future__ import annotations

import argparse
import configparser
import logging
import sys
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .corpus import (
    CommandPolisher,
    Site,
    SplitSpec,
    corpus_stats,
    filter_snippets,
    ingest,
    make_silver,
    read_parallel,
    read_snippets,
    sample_documents_path,
    split_corpus,
    write_parallel,
    write_snippets,
)
from .errors import HealthLitError
from .evaluation import SMOOTHING, corpus_bleu, format_table, hir_report, paired_t_test, sentence_bleu, summarize, summary_table
from .text import DEFAULT_ABBREVIATIONS, Sentence, load_abbreviations

logger = logging.getLogger("healthlit")

_SECTIONS = {
    "pipeline": ("lexicon", "documents", "abbreviations", "min_words", "seed", "polish_command", "jobs"),
    "split": ("train_fraction",),
    "model": ("embed_dim", "hidden_dim", "max_source_len", "max_target_len"),
    "train": ("learning_rate", "steps", "batch_size", "clip_norm", "log_every", "min_frequency", "max_vocab_size"),
    "eval": ("max_n", "smoothing", "decode", "beam_size"),
}


@dataclass
class PipelineConfig:
    """Every setting shared by the subcommands, with its default.

    Empty ``lexicon`` / ``documents`` mean the bundled sample files.
    """

    lexicon: str = ""
    documents: str = ""
    abbreviations: str = ""
    min_words: int = 5
    seed: int = 0
    polish_command: str = ""
    jobs: int = 1
    train_fraction: float = 0.9
    embed_dim: int = 32
    hidden_dim: int = 64
    max_source_len: int = 60
    max_target_len: int = 60
    learning_rate: float = 5e-3
    steps: int = 1000
    batch_size: int = 16
    clip_norm: float = 5.0
    log_every: int = 50
    min_frequency: int = 1
    max_vocab_size: int = 0  # 0 = unlimited
    max_n: int = 4
    smoothing: str = "add_one_higher_order"
    decode: str = "greedy"
    beam_size: int = 4

    @classmethod
    def load(cls, path) -> "PipelineConfig":
        """Read an INI file; unknown sections or keys are rejected."""
        parser = configparser.ConfigParser(interpolation=None)
        path = Path(path)
        if not path.is_file():
            raise HealthLitError(f"config file {path} not found")
        parser.read(path, encoding="utf-8")
        types = {f.name: f.type for f in fields(cls)}
        values = {}
        for section in parser.sections():
            if section not in _SECTIONS:
                raise HealthLitError(f"{path}: unknown section [{section}]")
            for key, raw in parser.items(section):
                if key not in _SECTIONS[section]:
                    raise HealthLitError(f"{path}: unknown key {key!r} in [{section}]")
                conv = {"int": int, "float": float, "str": str}[types[key]]
                try:
                    values[key] = conv(raw)
                except ValueError:
                    raise HealthLitError(f"{path}: [{section}] {key} = {raw!r} is not a valid {types[key]}") from None
        config = cls(**values)
        config.validate()
        return config

    def validate(self):
        for name in ("lexicon", "documents", "abbreviations"):
            value = getattr(self, name)
            if value and not Path(value).is_file():
                raise HealthLitError(f"{name} file {value} not found")
        if self.smoothing not in SMOOTHING:
            raise HealthLitError(f"smoothing must be one of {SMOOTHING}")
        if self.decode not in ("greedy", "beam"):
            raise HealthLitError("decode must be 'greedy' or 'beam'")

    def to_ini(self) -> str:
        lines = []
        for section, keys in _SECTIONS.items():
            lines.append(f"[{section}]")
            lines.extend(f"{k} = {getattr(self, k)}" for k in keys)
            lines.append("")
        return "\n".join(lines)

    # -- derived objects ---------------------------------------------------

    def load_lexicon(self, strict=True):
        from .thesaurus import load_lexicon, load_sample_lexicon

        return load_lexicon(self.lexicon, strict=strict) if self.lexicon else load_sample_lexicon(strict=strict)

    def abbreviation_list(self):
        return load_abbreviations(self.abbreviations) if self.abbreviations else DEFAULT_ABBREVIATIONS

    def model_config(self):
        from .nmt import ModelConfig

        return ModelConfig(self.embed_dim, self.hidden_dim, self.max_source_len, self.max_target_len)

    def train_config(self):
        from .nmt import TrainConfig

        return TrainConfig(
            learning_rate=self.learning_rate,
            steps=self.steps,
            batch_size=self.batch_size,
            seed=self.seed,
            clip_norm=self.clip_norm,
            log_every=self.log_every,
        )


def _resolve_config(args) -> PipelineConfig:
    config = PipelineConfig.load(args.config) if getattr(args, "config", None) else PipelineConfig()
    for f in fields(config):
        value = getattr(args, f.name, None)
        if value is not None:
            setattr(config, f.name, value)
    config.validate()
    return config


def _write_text(path, text: str):
    if path is None or str(path) == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8", newline="\n")


def _read_lines(path) -> list[str]:
    path = Path(path)
    if not path.is_file():
        raise HealthLitError(f"file {path} not found")
    return path.read_text(encoding="utf-8").splitlines()


# -- subcommands ----------------------------------------------------------------


def cmd_validate_lexicon(args, config):
    from .thesaurus import validate_lexicon

    lexicon = config.load_lexicon(strict=False)
    violations = validate_lexicon(lexicon)
    for v in violations:
        print(v)
    if violations:
        print(f"{len(violations)} containment violation(s)", file=sys.stderr)
        return 1
    print(f"ok: {len(lexicon)} entries", file=sys.stderr)
    return 0


def cmd_build_corpus(args, config):
    lexicon = config.load_lexicon()
    docs_path = config.documents or sample_documents_path()
    stats = {}
    docs = ingest(docs_path, format=args.input_format, skip_bad=args.skip_bad, stats=stats)
    snippets = list(filter_snippets(docs, lexicon, config.min_words, config.abbreviation_list()))
    write_snippets(snippets, args.out)
    rows = [(r.label, r.count, f"{r.mean_hir:.3f}") for r in corpus_stats(snippets, lexicon)]
    sys.stderr.write(format_table(["Data Source", "Snippets", "Mean HIR"], rows))
    if stats:
        logger.info("ingest stats: %s", stats)
    return 0


def cmd_make_silver(args, config):
    lexicon = config.load_lexicon()
    snippets = read_snippets(args.snippets)
    polish = CommandPolisher(config.polish_command) if config.polish_command else None
    pairs = make_silver(snippets, lexicon, config.seed, polish=polish, n_jobs=config.jobs)
    write_parallel(pairs, args.out)
    print(f"wrote {len(pairs)} pairs to {args.out}", file=sys.stderr)
    return 0


def cmd_split(args, config):
    pairs = read_parallel(args.input)
    parts = split_corpus(pairs, SplitSpec(config.train_fraction, config.seed))
    for name, items in parts.items():
        write_parallel(items, Path(args.out) / name)
    print(f"train={len(parts['train'])} valid={len(parts['valid'])}", file=sys.stderr)
    return 0


def cmd_train(args, config):
    from .nmt import build_vocab, train

    pairs = [(p.source, p.target) for p in read_parallel(args.data)]
    vocab = build_vocab(pairs, config.min_frequency, config.max_vocab_size or None)
    result = train(pairs, vocab, config.model_config(), config.train_config())
    result.checkpoint.save(args.out)
    if args.trace:
        _write_text(args.trace, result.trace_csv())
    first, last = result.loss_trace[0][1], result.loss_trace[-1][1]
    print(f"vocab={len(vocab)} steps={config.steps} loss {first:.4f} -> {last:.4f}", file=sys.stderr)
    return 0


def cmd_translate(args, config):
    from .nmt import Checkpoint, translate

    ckpt = Checkpoint.load(args.checkpoint)
    if args.sentence is not None:
        inputs = [args.sentence]
    elif args.input is not None:
        inputs = _read_lines(args.input)
    else:
        inputs = [line.rstrip("\n") for line in sys.stdin]
    out = []
    for line in inputs:
        t = translate(ckpt, line, config.decode, config.beam_size, args.max_len)
        out.append(t.sentence.raw + "\n")
    _write_text(args.output, "".join(out))
    return 0


def _read_scores(path) -> list[float]:
    try:
        return [float(x) for x in _read_lines(path) if x.strip()]
    except ValueError as exc:
        raise HealthLitError(f"{path}: {exc}") from None


def cmd_evaluate(args, config):
    names = args.name or []
    summaries, corpus, per_system = {}, {}, {}
    if args.hyp:
        if args.ref is None:
            raise HealthLitError("--ref is required with --hyp")
        refs = [Sentence(r) for r in _read_lines(args.ref)]
        for k, hyp_path in enumerate(args.hyp):
            name = names[k] if k < len(names) else Path(hyp_path).stem
            hyps = [Sentence(h) for h in _read_lines(hyp_path)]
            if len(hyps) != len(refs):
                raise HealthLitError(f"{hyp_path} has {len(hyps)} lines but {args.ref} has {len(refs)}")
            scores = [sentence_bleu(h, r, config.max_n, config.smoothing).score for h, r in zip(hyps, refs)]
            per_system[name] = scores
            summaries[name] = summarize(scores)
            corpus[name] = corpus_bleu(hyps, refs, config.max_n).score
            if args.scores_dir:
                Path(args.scores_dir).mkdir(parents=True, exist_ok=True)
                _write_text(Path(args.scores_dir) / f"{name}.scores", "".join(f"{s!r}\n" for s in scores))
    for k, path in enumerate(args.scores or []):
        name = names[len(per_system)] if len(per_system) < len(names) else Path(path).stem
        per_system[name] = _read_scores(path)
        summaries[name] = summarize(per_system[name])
    if not summaries:
        raise HealthLitError("nothing to evaluate: give --hyp and --ref, or --scores")
    _write_text(args.output, summary_table(summaries, args.format, corpus if len(corpus) == len(summaries) else None))
    systems = list(per_system)
    for other in systems[1:]:
        result = paired_t_test(per_system[systems[0]], per_system[other])
        if args.format == "csv":
            print(f"# paired t-test {systems[0]} vs {other}: {result}")
        else:
            print(f"paired t-test {systems[0]} vs {other}: {result}")
    return 0


def _parse_stage(spec: str, default_sites=None):
    """``NAME=PATH``: PATH is a parallel directory with ``:src``/``:tgt``, or a text file.

    Text-file lines take their site from ``default_sites`` when given,
    otherwise they are all labelled "Other".
    """
    if "=" not in spec:
        raise HealthLitError(f"--stage expects NAME=PATH, got {spec!r}")
    name, path = spec.split("=", 1)
    side = None
    for suffix in (":src", ":tgt"):
        if path.endswith(suffix):
            path, side = path[: -len(suffix)], suffix[1:]
    if side is not None or Path(path).is_dir():
        pairs = read_parallel(path)
        sentences = [p.target if side == "tgt" else p.source for p in pairs]
        sites = [p.source_site.display for p in pairs]
    else:
        sentences = [Sentence(line) for line in _read_lines(path)]
        if default_sites is None:
            sites = [Site.OTHER.display] * len(sentences)
        elif len(default_sites) != len(sentences):
            raise HealthLitError(f"{path} has {len(sentences)} lines but --sites-from lists {len(default_sites)} sites")
        else:
            sites = list(default_sites)
    return name, sentences, sites


def cmd_hir_report(args, config):
    lexicon = config.load_lexicon()
    stages, sites = {}, {}
    default_sites = None
    if args.sites_from:
        default_sites = [p.source_site.display for p in read_parallel(args.sites_from)]
    for spec in args.stage:
        name, sentences, tags = _parse_stage(spec, default_sites)
        if name in stages:
            raise HealthLitError(f"duplicate stage name {name!r}")
        stages[name], sites[name] = sentences, tags
    report = hir_report(stages, sites, lexicon, site_order=[s.display for s in Site])
    _write_text(args.output, report.to_csv() if args.format == "csv" else report.to_text())
    return 0


def cmd_gradcheck(args, config):
    from .nmt import ModelConfig, gradient_check, standard_tiny_batch

    dtype = {"longdouble": np.longdouble, "float64": np.float64}[args.dtype]
    model = ModelConfig(embed_dim=args.embed_dim, hidden_dim=args.hidden_dim)
    sources, targets = standard_tiny_batch(args.vocab_size, config.seed)
    report = gradient_check(model, sources, targets, args.vocab_size, args.epsilon, config.seed, dtype)
    print("parameter\tmax_rel_error\tn")
    for line in report.lines():
        print(line)
    ok = report.passed(args.tolerance)
    print(f"{'PASS' if ok else 'FAIL'}: worst {report.worst:.3e} (tolerance {args.tolerance:g})", file=sys.stderr)
    return 0 if ok else 1


# -- parser ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI configuration file; flags override its values")
    common.add_argument("--seed", type=int, help="global seed for every random choice")
    common.add_argument("--lexicon", help="lexicon TSV (default: bundled sample)")
    common.add_argument("-v", "--verbose", action="count", default=0)

    parser = argparse.ArgumentParser(prog="healthlit", description="Health-literacy translation pipeline.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("validate-lexicon", parents=[common], help="check a lexicon for containment violations")
    p.set_defaults(func=cmd_validate_lexicon)

    p = sub.add_parser("build-corpus", parents=[common], help="ingest documents and keep snippets with matches")
    p.add_argument("--documents", help="document dump (default: bundled sample)")
    p.add_argument("--input-format", choices=("jsonl",), default="jsonl")
    p.add_argument("--abbreviations", help="file with one abbreviation per line")
    p.add_argument("--min-words", dest="min_words", type=int)
    p.add_argument("--skip-bad", action="store_true", help="skip malformed records instead of failing")
    p.add_argument("--out", required=True, help="snippets JSONL output")
    p.set_defaults(func=cmd_build_corpus)

    p = sub.add_parser("make-silver", parents=[common], help="generate silver-standard parallel pairs")
    p.add_argument("--snippets", required=True)
    p.add_argument("--out", required=True, help="output directory for src.txt, tgt.txt, meta.jsonl")
    p.add_argument("--polish-command", dest="polish_command", help="line-in/line-out correction command")
    p.add_argument("--jobs", type=int)
    p.set_defaults(func=cmd_make_silver)

    p = sub.add_parser("split", parents=[common], help="seeded train/valid split of a parallel directory")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True, help="writes OUT/train and OUT/valid")
    p.add_argument("--train-fraction", dest="train_fraction", type=float)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("train", parents=[common], help="train the BiLSTM translator")
    p.add_argument("--data", required=True, help="parallel directory")
    p.add_argument("--out", required=True, help="checkpoint path")
    p.add_argument("--trace", help="write the loss trace as CSV")
    p.add_argument("--steps", type=int)
    p.add_argument("--lr", dest="learning_rate", type=float)
    p.add_argument("--batch-size", dest="batch_size", type=int)
    p.add_argument("--embed-dim", dest="embed_dim", type=int)
    p.add_argument("--hidden-dim", dest="hidden_dim", type=int)
    p.add_argument("--clip-norm", dest="clip_norm", type=float)
    p.add_argument("--log-every", dest="log_every", type=int)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("translate", parents=[common], help="translate sentences with a checkpoint")
    p.add_argument("--checkpoint", required=True)
    src = p.add_mutually_exclusive_group()
    src.add_argument("--sentence")
    src.add_argument("--input", help="one sentence per line (default: standard input)")
    p.add_argument("--output", help="default: standard output")
    p.add_argument("--decode", choices=("greedy", "beam"))
    p.add_argument("--beam-size", dest="beam_size", type=int)
    p.add_argument("--max-len", dest="max_len", type=int)
    p.set_defaults(func=cmd_translate)

    p = sub.add_parser("evaluate", parents=[common], help="BLEU quartile summary and paired t-test")
    p.add_argument("--hyp", action="append", help="hypothesis file (repeatable)")
    p.add_argument("--ref", help="reference file")
    p.add_argument("--scores", action="append", help="precomputed sentence scores, one per line (repeatable)")
    p.add_argument("--name", action="append", help="row label for each system, in order")
    p.add_argument("--scores-dir", help="also write NAME.scores files here")
    p.add_argument("--smoothing", choices=SMOOTHING)
    p.add_argument("--format", choices=("text", "csv"), default="text")
    p.add_argument("--output")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("hir-report", parents=[common], help="mean HIR per source site and stage")
    p.add_argument(
        "--stage",
        action="append",
        required=True,
        help="NAME=DIR:src, NAME=DIR:tgt or NAME=FILE (repeatable, column order)",
    )
    p.add_argument("--sites-from", help="parallel directory whose meta.jsonl labels the lines of FILE stages")
    p.add_argument("--format", choices=("text", "csv"), default="text")
    p.add_argument("--output")
    p.set_defaults(func=cmd_hir_report)

    p = sub.add_parser("gradcheck", parents=[common], help="finite-difference check of the model gradients")
    p.add_argument("--embed-dim", type=int, default=4)
    p.add_argument("--hidden-dim", type=int, default=5)
    p.add_argument("--vocab-size", type=int, default=20)
    p.add_argument("--epsilon", type=float, default=1e-4)
    p.add_argument("--tolerance", type=float, default=1e-4)
    p.add_argument("--dtype", choices=("longdouble", "float64"), default="longdouble")
    p.set_defaults(func=cmd_gradcheck)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s: %(message)s")
    try:
        config = _resolve_config(args)
        return args.func(args, config)
    except (HealthLitError, ValueError, OSError) as exc:
        print(f"healthlit {args.command}: error: {exc}", file=sys.stderr)
        return 1


def main(argv=None):
    try:
        code = run(argv)
    except SystemExit as exc:  # argparse usage errors
        code = exc.code if isinstance(exc.code, int) else 2
    sys.exit(code)


if __name__ == "__main__":
    main()
