"""Command-line pipeline: generate, train, project, score, fuse, evaluate.

Every subcommand is reproducible from its flag set alone: all randomness is
seeded through flags and outputs carry no timestamps, so identical
invocations produce byte-identical files.

Exit codes: 0 success, 1 runtime error, 2 usage error.
"""

from __future__ import annotations

import argparse
import sys

from . import io as cio
from .data import SynthConfig, gen_synthetic, gen_trials
from .evaluation import det_points, eer, error_curve
from .lda import LdaConfig, train_lda
from .metric import TrainConfig, train
from .sampler import SamplerConfig
from .scoring import FusionConfig, fuse, score_trials


def _fmt(x: float) -> str:
    return repr(float(x))


def _batches_per_epoch(text: str):
    if text == "cover":
        return text
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected an integer or 'cover', got {text!r}"
        ) from None


def _add_embedding_input(sub, flag: str, help_text: str):
    sub.add_argument(flag, required=True, help=help_text)
    sub.add_argument(
        "--format",
        choices=cio.EMBEDDING_FORMATS,
        default="binary",
        help="embedding file format (default binary)",
    )
    sub.add_argument(
        "--length-norm",
        action="store_true",
        help="scale each vector to unit Euclidean norm at load time",
    )


def cmd_gen_synth(args, parser):
    if args.trials_out and args.n_target + args.n_nontarget == 0:
        parser.error("--trials-out needs --n-target and/or --n-nontarget")
    if args.trials_out is None and (args.n_target or args.n_nontarget):
        parser.error("--n-target/--n-nontarget need --trials-out")
    cfg = SynthConfig(
        n_speakers=args.speakers,
        utts_per_speaker=args.utts,
        dim=args.dim,
        speaker_scatter=args.speaker_scatter,
        channel_scatter=args.channel_scatter,
        nuisance_dims=args.nuisance_dims,
        nuisance_scale=args.nuisance_scale,
        seed=args.seed,
    )
    dataset = gen_synthetic(cfg)
    cio.write_embeddings(dataset, args.out, args.format)
    print(f"wrote {len(dataset)} embeddings (dim {dataset.dim}) to {args.out}")
    if args.trials_out:
        trials = gen_trials(dataset, args.n_target, args.n_nontarget, args.trial_seed)
        cio.write_trials(trials, args.trials_out)
        print(
            f"wrote {args.n_target} target / {args.n_nontarget} nontarget "
            f"trials to {args.trials_out}"
        )


def cmd_train_mmml(args, parser):
    dataset = cio.load_embeddings(args.dev, args.format, args.length_norm)
    config = TrainConfig(
        margin=args.margin,
        learning_rate=args.lr,
        lr_decay=args.lr_decay,
        epochs=args.epochs,
        sampler=SamplerConfig(
            batch_size=args.batch_size,
            seed=args.seed,
            batches_per_epoch=args.batches_per_epoch,
        ),
        init=args.init,
        init_seed=args.seed,
        early_stop_patience=args.patience,
    )
    proj, report = train(dataset, args.dout, config)
    cio.write_projection(proj, args.out)
    if args.log:
        with open(args.log, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("#epoch\tmean_loss\tactive_fraction\tlearning_rate\n")
            for row in report.epochs:
                fh.write(
                    f"{row.epoch}\t{_fmt(row.mean_loss)}\t"
                    f"{_fmt(row.active_fraction)}\t{_fmt(row.learning_rate)}\n"
                )
    final = report.epochs[-1].mean_loss if report.epochs else float("nan")
    print(
        f"trained max-margin projection {dataset.dim}->{args.dout} "
        f"({len(report.epochs)} epochs, final mean loss {final:.6g}) "
        f"to {args.out}"
    )


def cmd_train_lda(args, parser):
    dataset = cio.load_embeddings(args.dev, args.format, args.length_norm)
    proj = train_lda(dataset, LdaConfig(d_out=args.dout, ridge_rel=args.ridge))
    cio.write_projection(proj, args.out)
    print(f"trained LDA projection {dataset.dim}->{args.dout} to {args.out}")


def cmd_score(args, parser):
    dataset = cio.load_embeddings(args.emb, args.format, args.length_norm)
    trials = cio.load_trials(args.trials)
    chain = [cio.load_projection(p) for p in args.proj]
    scores = score_trials(dataset, trials, chain)
    cio.write_scores(scores, args.out)
    print(f"scored {len(scores)} trials ({len(chain)} projections) to {args.out}")


def cmd_fuse(args, parser):
    fused = fuse(
        cio.load_scores(args.a),
        cio.load_scores(args.b),
        FusionConfig(alpha=args.alpha),
    )
    cio.write_scores(fused, args.out)
    print(f"fused {len(fused)} scores (alpha={args.alpha}) to {args.out}")


def cmd_eval(args, parser):
    scores = cio.load_scores(args.scores)
    trials = cio.load_trials(args.trials)
    result = eer(scores, trials)
    if args.det_out:
        curve = error_curve(scores, trials)
        with open(args.det_out, "w", encoding="utf-8", newline="\n") as fh:
            for x, y in det_points(curve):
                fh.write(f"{_fmt(x)}\t{_fmt(y)}\n")
    print(f"EER {result.eer:.4f} ({result.eer * 100:.2f}%)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cosmargin",
        description=(
            "Train and evaluate linear projections for cosine-scored "
            "speaker verification."
        ),
    )
    subs = parser.add_subparsers(dest="command", required=True)

    g = subs.add_parser("gen-synth", help="generate a synthetic speaker corpus")
    g.add_argument("--speakers", type=int, required=True)
    g.add_argument("--utts", type=int, required=True, help="utterances per speaker")
    g.add_argument("--dim", type=int, required=True)
    g.add_argument("--speaker-scatter", type=float, default=1.0)
    g.add_argument("--channel-scatter", type=float, default=1.0)
    g.add_argument("--nuisance-dims", type=int, default=0)
    g.add_argument("--nuisance-scale", type=float, default=1.0)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True, help="embedding output path")
    g.add_argument("--format", choices=cio.EMBEDDING_FORMATS, default="binary")
    g.add_argument("--trials-out", help="also sample trials to this path")
    g.add_argument("--n-target", type=int, default=0)
    g.add_argument("--n-nontarget", type=int, default=0)
    g.add_argument("--trial-seed", type=int, default=0)
    g.set_defaults(func=cmd_gen_synth)

    t = subs.add_parser("train-mmml", help="train a max-margin projection")
    _add_embedding_input(t, "--dev", "development embeddings")
    t.add_argument("--dout", type=int, default=150, help="output dimension")
    t.add_argument("--margin", type=float, default=0.5)
    t.add_argument("--lr", type=float, default=0.05)
    t.add_argument("--lr-decay", type=float, default=0.95)
    t.add_argument("--epochs", type=int, default=50)
    t.add_argument("--batch-size", type=int, default=128)
    t.add_argument(
        "--batches-per-epoch",
        type=_batches_per_epoch,
        default="cover",
        help="batch count per epoch, or 'cover' to pass once over all anchors",
    )
    t.add_argument("--seed", type=int, default=0, help="sampler and init seed")
    t.add_argument("--init", choices=("identity", "random"), default="random")
    t.add_argument("--patience", type=int, default=None,
                   help="early-stop after this many epochs without improvement")
    t.add_argument("--out", required=True, help="projection output path")
    t.add_argument("--log", help="per-epoch TSV log path")
    t.set_defaults(func=cmd_train_mmml)

    l = subs.add_parser("train-lda", help="train a Fisher LDA projection")
    _add_embedding_input(l, "--dev", "development embeddings")
    l.add_argument("--dout", type=int, default=150)
    l.add_argument("--ridge", type=float, default=1e-6,
                   help="ridge on the within scatter, relative to trace/dim")
    l.add_argument("--out", required=True)
    l.set_defaults(func=cmd_train_lda)

    s = subs.add_parser("score", help="cosine-score trials through projections")
    _add_embedding_input(s, "--emb", "embeddings covering all trial utterances")
    s.add_argument("--trials", required=True)
    s.add_argument(
        "--proj",
        action="append",
        default=[],
        help="projection file; repeat to compose in application order",
    )
    s.add_argument("--out", required=True, help="score output path")
    s.set_defaults(func=cmd_score)

    f = subs.add_parser("fuse", help="linearly interpolate two score files")
    f.add_argument("--a", required=True, help="first score file (weight alpha)")
    f.add_argument("--b", required=True, help="second score file (weight 1-alpha)")
    f.add_argument("--alpha", type=float, default=0.2)
    f.add_argument("--out", required=True)
    f.set_defaults(func=cmd_fuse)

    e = subs.add_parser("eval", help="report EER, optionally DET points")
    e.add_argument("--scores", required=True)
    e.add_argument("--trials", required=True)
    e.add_argument("--det-out", help="write probit-warped DET points as TSV")
    e.set_defaults(func=cmd_eval)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        args.func(args, parser)
    except SystemExit as exc:  # parser.error inside a handler
        return int(exc.code or 0)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
