"""Command-line front end.

Subcommands: clean, stats, train-embed, align, eval, translate, synth.
Results go to standard output, diagnostics to standard error. Every
output file is accompanied by a run manifest. Exit codes: 0 success,
1 usage error, 2 data/format error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import __version__
from .adversarial import AdversarialConfig, adversarial_align
from .alignment import LinearMap, procrustes, refine
from .cbow import CbowConfig, train_cbow
from .corpus import CleaningRules, build_vocabulary, clean_corpus, corpus_stats, load_lexicon
from .embedding import init_from_pretrained, normalize, read_embedding, write_embedding
from .errors import CrosslexError, NumericalError
from .manifest import write_manifest
from .rcsls import RcslsConfig, rcsls_align
from .report import format_report, render_pk_figure
from .retrieval import evaluate, retrieve
from .synthbench import generate, write_instance

log = logging.getLogger("crosslex")


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the contract here is exit 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _read_sentences(path: Path) -> list[list[str]]:
    """Whitespace-tokenized sentences of an already-clean corpus file."""
    sentences = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            tokens = line.split()
            if tokens:
                sentences.append(tokens)
    return sentences


def _load_emb(path: Path, scheme: str):
    return normalize(read_embedding(path), scheme)


def _rules_from_args(args) -> CleaningRules:
    return CleaningRules(
        lowercase=not args.no_lowercase,
        strip_punctuation=not args.keep_punctuation,
        dedup=not args.no_dedup,
    )


def _add_cleaning_flags(p) -> None:
    p.add_argument("--no-dedup", action="store_true",
                   help="keep duplicate sentences")
    p.add_argument("--keep-punctuation", action="store_true",
                   help="do not strip punctuation")
    p.add_argument("--no-lowercase", action="store_true",
                   help="do not lowercase")


def cmd_clean(args) -> int:
    rules = _rules_from_args(args)
    n = 0
    with open(args.input, "rb") as inp, \
            open(args.output, "w", encoding="utf-8", newline="\n") as out:
        for sent in clean_corpus(inp, rules):
            out.write(" ".join(sent) + "\n")
            n += 1
    log.info("clean: wrote %d sentences to %s", n, args.output)
    write_manifest(
        str(args.output) + ".manifest", "clean",
        {"no_dedup": args.no_dedup, "keep_punctuation": args.keep_punctuation,
         "no_lowercase": args.no_lowercase, "output": str(args.output)},
        {"corpus": args.input}, seed=None, version=__version__,
    )
    return 0


def cmd_stats(args) -> int:
    if args.clean:
        rules = _rules_from_args(args)
        with open(args.corpus, "rb") as f:
            stats = corpus_stats(clean_corpus(f, rules))
    else:
        stats = corpus_stats(_read_sentences(args.corpus))
    print(f"sentences {stats.n_sentences}")
    print(f"tokens {stats.n_tokens}")
    print(f"unique_words {stats.n_unique_words}")
    return 0


def cmd_train_embed(args) -> int:
    sentences = _read_sentences(args.corpus)
    config = CbowConfig(
        dim=args.dim, epochs=args.epochs, negatives=args.negatives,
        window=args.window, batch_size=args.batch_size,
        learning_rate=args.lr, min_count=args.min_count, seed=args.seed,
        subsample=args.subsample,
    )
    init = None
    freeze = None
    inputs = {"corpus": args.corpus}
    if args.init:
        pretrained = read_embedding(args.init)
        vocab = build_vocabulary(sentences, config.min_count)
        init, coverage = init_from_pretrained(pretrained, vocab, config.dim, config.seed)
        log.info("train-embed: warm start covers %.2f%% of vocabulary", 100 * coverage)
        if args.freeze_init:
            freeze = {w for w in vocab.words if w in pretrained.vocab}
        inputs["pretrained"] = args.init
    emb = train_cbow(sentences, config, init=init, freeze_words=freeze,
                     threads=args.threads)
    write_embedding(emb, args.out)
    write_manifest(
        str(args.out) + ".manifest", "train-embed",
        {"dim": args.dim, "epochs": args.epochs, "negatives": args.negatives,
         "window": args.window, "batch_size": args.batch_size, "lr": args.lr,
         "min_count": args.min_count, "subsample": args.subsample,
         "freeze_init": args.freeze_init, "threads": args.threads,
         "out": str(args.out)},
        inputs, seed=args.seed, version=__version__,
    )
    log.info("train-embed: wrote %d x %d embedding to %s", len(emb), emb.dim, args.out)
    return 0


def cmd_align(args) -> int:
    src = _load_emb(args.src, args.normalize)
    tgt = _load_emb(args.tgt, args.normalize)
    inputs = {"src": args.src, "tgt": args.tgt}
    train_lex = None
    if args.train_lex:
        with open(args.train_lex, "rb") as f:
            train_lex = load_lexicon(f)
        inputs["train_lex"] = args.train_lex

    if args.method in ("procrustes", "rcsls") and train_lex is None:
        log.error("--method %s requires --train-lex", args.method)
        return 1

    if args.method == "procrustes":
        lmap = procrustes(src, tgt, train_lex)
    elif args.method == "adversarial":
        config = AdversarialConfig(
            disc_hidden=args.adv_disc_hidden, disc_layers=args.adv_disc_layers,
            disc_dropout=args.adv_disc_dropout, smoothing=args.adv_smoothing,
            map_lr=args.adv_map_lr, disc_lr=args.adv_disc_lr,
            epochs=args.adv_epochs, batch_size=args.adv_batch_size,
            ortho_beta=args.adv_ortho_beta, vocab_cap=args.adv_vocab_cap,
            seed=args.seed, epoch_size=args.adv_epoch_size,
            disc_steps=args.adv_disc_steps,
        )
        lmap = adversarial_align(src, tgt, config)
    else:
        config = RcslsConfig(
            k=args.rcsls_k, lr=args.rcsls_lr, epochs=args.rcsls_epochs,
            neighborhood_refresh=args.rcsls_refresh,
            spectral=not args.rcsls_no_spectral, seed=args.seed,
        )
        lmap = rcsls_align(src, tgt, train_lex, config)

    if args.refine > 0:
        lmap = refine(src, tgt, lmap, iterations=args.refine,
                      k=args.refine_k, max_rank=args.refine_max_rank)

    lmap.save(args.out)
    write_manifest(
        str(args.out) + ".manifest", "align",
        {"method": args.method, "refine": args.refine, "normalize": args.normalize,
         "out": str(args.out),
         **{k: v for k, v in vars(args).items()
            if k.startswith(("adv_", "rcsls_", "refine_"))}},
        inputs, seed=args.seed, version=__version__,
    )
    log.info("align: wrote %dx%d map to %s", lmap.dim, lmap.dim, args.out)
    return 0


def cmd_eval(args) -> int:
    src = _load_emb(args.src, args.normalize)
    tgt = _load_emb(args.tgt, args.normalize)
    lmap = LinearMap.load(args.map)
    with open(args.lexicon, "rb") as f:
        lex = load_lexicon(f)
    ks = tuple(int(x) for x in args.ks.split(","))
    methods = ["nn", "csls"] if args.method == "both" else [args.method]
    reports = {}
    for method in methods:
        reports[method] = evaluate(lmap, lex, src, tgt, method=method,
                                   k=args.csls_k, ks=ks)
    for method in methods:
        text = format_report(reports[method], lex, per_query=args.per_query)
        if len(methods) > 1:
            first, rest = text.split("\n", 1)
            text = f"{method} {first}\n{rest}" if rest else f"{method} {first}\n"
        print(text, end="")
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for method in methods:
            with open(out / f"report_{method}.txt", "w", encoding="utf-8",
                      newline="\n") as f:
                f.write(format_report(reports[method], lex, per_query=True))
        render_pk_figure(reports, out / "pk_curve.png")
        write_manifest(
            out / "manifest.txt", "eval",
            {"method": args.method, "csls_k": args.csls_k, "ks": args.ks,
             "normalize": args.normalize, "out_dir": str(out)},
            {"src": args.src, "tgt": args.tgt, "map": args.map,
             "lexicon": args.lexicon},
            seed=None, version=__version__,
        )
        log.info("eval: wrote report and figure to %s", out)
    return 0


def cmd_translate(args) -> int:
    src = _load_emb(args.src, args.normalize)
    tgt = _load_emb(args.tgt, args.normalize)
    lmap = LinearMap.load(args.map)
    ranked = retrieve(args.word, lmap, src, tgt, method=args.method,
                      k=args.csls_k, top=args.top)
    for word, score in ranked:
        print(f"{word}\t{score:.6f}")
    return 0


def cmd_synth(args) -> int:
    inst = generate(n=args.n, d=args.d, noise_sigma=args.noise, seed=args.seed)
    paths = write_instance(inst, args.out)
    write_manifest(
        Path(args.out) / "manifest.txt", "synth",
        {"n": args.n, "d": args.d, "noise": args.noise, "out": str(args.out)},
        {}, seed=args.seed, version=__version__,
    )
    log.info("synth: wrote instance to %s", args.out)
    for name, p in paths.items():
        log.info("synth: %s -> %s", name, p)
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="crosslex",
                     description="Cross-lingual word embedding pipeline")
    parser.add_argument("--version", action="version", version=f"crosslex {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0,
                        help="diagnostics on stderr (-v info, -vv debug)")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    p = sub.add_parser("clean", help="clean a raw one-sentence-per-line corpus")
    p.add_argument("--input", type=Path, required=True)
    p.add_argument("--output", type=Path, required=True)
    _add_cleaning_flags(p)
    p.set_defaults(func=cmd_clean)

    p = sub.add_parser("stats", help="corpus statistics")
    p.add_argument("--corpus", type=Path, required=True)
    p.add_argument("--clean", action="store_true",
                   help="apply cleaning rules before counting")
    _add_cleaning_flags(p)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("train-embed", help="train CBOW word vectors")
    p.add_argument("--corpus", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--init", type=Path, default=None,
                   help="pretrained embedding for warm start")
    p.add_argument("--dim", type=int, default=300)
    p.add_argument("--epochs", type=int, default=5)
    p.add_argument("--negatives", type=int, default=8)
    p.add_argument("--window", type=int, default=5)
    p.add_argument("--batch-size", type=int, default=3000)
    p.add_argument("--lr", type=float, default=0.05)
    p.add_argument("--min-count", type=int, default=1)
    p.add_argument("--subsample", type=float, default=0.0)
    p.add_argument("--freeze-init", action="store_true",
                   help="freeze rows copied from the pretrained embedding")
    p.add_argument("--threads", type=int, default=1,
                   help=">1 forfeits bit-determinism")
    p.add_argument("--seed", type=int, default=1)
    p.set_defaults(func=cmd_train_embed)

    p = sub.add_parser("align", help="learn a source-to-target linear map")
    p.add_argument("--src", type=Path, required=True)
    p.add_argument("--tgt", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--method", choices=("procrustes", "adversarial", "rcsls"),
                   required=True)
    p.add_argument("--train-lex", type=Path, default=None)
    p.add_argument("--refine", type=int, default=0, metavar="N",
                   help="iterative Procrustes refinement rounds")
    p.add_argument("--refine-k", type=int, default=10)
    p.add_argument("--refine-max-rank", type=int, default=10000)
    p.add_argument("--normalize", choices=("unit", "center_unit", "none"),
                   default="unit")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--adv-epochs", type=int, default=30)
    p.add_argument("--adv-batch-size", type=int, default=32)
    p.add_argument("--adv-disc-hidden", type=int, default=2048)
    p.add_argument("--adv-disc-layers", type=int, default=2)
    p.add_argument("--adv-disc-dropout", type=float, default=0.1)
    p.add_argument("--adv-smoothing", type=float, default=0.2)
    p.add_argument("--adv-map-lr", type=float, default=0.1)
    p.add_argument("--adv-disc-lr", type=float, default=0.1)
    p.add_argument("--adv-ortho-beta", type=float, default=0.01)
    p.add_argument("--adv-vocab-cap", type=int, default=50000)
    p.add_argument("--adv-epoch-size", type=int, default=50000)
    p.add_argument("--adv-disc-steps", type=int, default=3)
    p.add_argument("--rcsls-k", type=int, default=10)
    p.add_argument("--rcsls-lr", type=float, default=1.0)
    p.add_argument("--rcsls-epochs", type=int, default=10)
    p.add_argument("--rcsls-refresh", type=int, default=1)
    p.add_argument("--rcsls-no-spectral", action="store_true")
    p.set_defaults(func=cmd_align)

    p = sub.add_parser("eval", help="word-translation retrieval evaluation")
    p.add_argument("--src", type=Path, required=True)
    p.add_argument("--tgt", type=Path, required=True)
    p.add_argument("--map", type=Path, required=True)
    p.add_argument("--lexicon", type=Path, required=True)
    p.add_argument("--method", choices=("nn", "csls", "both"), default="both")
    p.add_argument("--csls-k", type=int, default=10)
    p.add_argument("--ks", default="1,5,10", help="comma-separated ranks")
    p.add_argument("--per-query", action="store_true")
    p.add_argument("--out-dir", type=Path, default=None,
                   help="write report files and P@k figure here")
    p.add_argument("--normalize", choices=("unit", "center_unit", "none"),
                   default="unit")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("translate", help="rank translations of one word")
    p.add_argument("--word", required=True)
    p.add_argument("--src", type=Path, required=True)
    p.add_argument("--tgt", type=Path, required=True)
    p.add_argument("--map", type=Path, required=True)
    p.add_argument("--method", choices=("nn", "csls"), default="csls")
    p.add_argument("--csls-k", type=int, default=10)
    p.add_argument("--top", type=int, default=10)
    p.add_argument("--normalize", choices=("unit", "center_unit", "none"),
                   default="unit")
    p.set_defaults(func=cmd_translate)

    p = sub.add_parser("synth", help="generate a synthetic aligned instance")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_synth)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(stream=sys.stderr, level=level,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except NumericalError as e:
        log.error("%s", e)
        return 3
    except CrosslexError as e:
        log.error("%s", e)
        return e.exit_code
    except (ValueError, KeyError) as e:
        log.error("%s", e)
        return 1
    except OSError as e:
        log.error("%s", e)
        return 2


if __name__ == "__main__":
    sys.exit(main())
