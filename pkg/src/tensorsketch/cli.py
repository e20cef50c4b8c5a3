"""Command-line entry point.

Exit codes: 0 success, 2 usage error, 3 data-format error, 4 a validation
check failed.
"""

import argparse
import sys
from pathlib import Path

from .errors import FormatError, ShapeError, TensorSketchError
from .formats import load_t3b, save_sketch, save_sketch_pair, save_t3b
from .harness import (
    CLI_METHODS,
    Dataset,
    SynthConfig,
    evaluate,
    relaxation_trials,
    reports_to_jsonl,
    sample_ratio_sweep,
    subspace_gap_trials,
    synth_stream,
)
from .sketch import HooiConfig, train_tucker1, train_tucker2_hooi
from .tensor import Tensor3

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_VALIDATION = 4


def _ratios(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid ratio list {text!r}") from None


def _add_hooi_args(p):
    p.add_argument("--max-iters", type=int, default=100, help="HOOI sweep limit")
    p.add_argument("--tol", type=float, default=1e-8, help="HOOI relative residual tolerance")


def _add_eval_args(p):
    p.add_argument("--train", required=True, help="training tensor (.t3b)")
    p.add_argument("--test", required=True, help="test matrices stored as a tensor (.t3b)")
    p.add_argument("--r", type=int, default=10, help="target rank")
    p.add_argument("--k", type=int, default=20, help="rows of the left sketch")
    p.add_argument("--l", type=int, default=None, help="rows of the right sketch (default: k)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--report", required=True, help="output JSONL path, or - for stdout")
    p.add_argument("--workers", type=int, default=1, help="threads for test-set evaluation")
    p.add_argument("--timing", action="store_true",
                   help="include wall-clock timings (makes the report non-reproducible)")
    _add_hooi_args(p)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="tensorsketch",
        description="Tensor-trained sketches for low-rank approximation of matrix streams.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write a synthetic train/test stream")
    p.add_argument("--m", type=int, default=64)
    p.add_argument("--n", type=int, default=48)
    p.add_argument("--train", type=int, default=20, help="number of training slices")
    p.add_argument("--test", type=int, default=80, help="number of test matrices")
    p.add_argument("--rank-p", type=int, default=10, help="latent rank of the shared subspace")
    p.add_argument("--noise", type=float, default=0.01)
    p.add_argument("--drift", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("train", help="train a sketch (.skb) or sketch pair (.skp)")
    p.add_argument("--train", required=True, help="training tensor (.t3b)")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--two-sided", action="store_true", help="fit a Tucker2 pair by HOOI")
    p.add_argument("--l", type=int, default=None)
    _add_hooi_args(p)
    p.add_argument("--out", required=True)

    p = sub.add_parser("eval", help="score one method on a test set")
    p.add_argument("--method", required=True, choices=sorted(CLI_METHODS))
    _add_eval_args(p)

    p = sub.add_parser("sweep", help="score both trained methods over training sample ratios")
    p.add_argument("--ratios", type=_ratios, default=[0.02, 0.2, 0.8])
    _add_eval_args(p)

    p = sub.add_parser("validate", help="check the stream relaxation (1) or subspace (2) bound")
    p.add_argument("--thm", type=int, choices=(1, 2), required=True)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    return parser


def _cmd_synth(args):
    cfg = SynthConfig(args.m, args.n, args.train, args.test, args.rank_p, args.noise, args.drift)
    ds = synth_stream(cfg, args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_t3b(ds.train, out / "train.t3b")
    save_t3b(Tensor3.from_slices(ds.test), out / "test.t3b")
    print(f"wrote {out / 'train.t3b'} ({cfg.d_train} slices) and {out / 'test.t3b'} ({cfg.d_test} slices)")
    return EXIT_OK


def _cmd_train(args):
    t = load_t3b(args.train)
    if args.two_sided:
        cfg = HooiConfig(max_iters=args.max_iters, rel_tol=args.tol)
        pair, diag = train_tucker2_hooi(t, args.k, args.l or args.k, cfg)
        save_sketch_pair(pair, args.out)
        print(f"HOOI: {diag.iterations} sweeps, converged={diag.converged}, "
              f"residual={diag.residual_history[-1]:.6g}")
    else:
        sketch = train_tucker1(t, args.k)
        save_sketch(sketch, args.out)
    print(f"wrote {args.out}")
    return EXIT_OK


def _load_dataset(args):
    return Dataset(load_t3b(args.train), load_t3b(args.test), name=Path(args.test).stem, source=args.test)


def _write_report(text, dest):
    if dest == "-":
        sys.stdout.write(text)
    else:
        Path(dest).write_text(text)


def _cmd_eval(args):
    ds = _load_dataset(args)
    cfg = HooiConfig(max_iters=args.max_iters, rel_tol=args.tol)
    l = args.l or args.k
    report = evaluate(ds, args.method, args.r, args.k, l, args.seed, cfg, args.workers)
    _write_report(report.to_jsonl(include_timing=args.timing), args.report)
    return EXIT_OK


def _cmd_sweep(args):
    ds = _load_dataset(args)
    cfg = HooiConfig(max_iters=args.max_iters, rel_tol=args.tol)
    reports = sample_ratio_sweep(ds, args.ratios, args.r, args.k, args.l or args.k, args.seed, cfg,
                                 workers=args.workers)
    _write_report(reports_to_jsonl(reports, include_timing=args.timing), args.report)
    return EXIT_OK


def _cmd_validate(args):
    if args.thm == 1:
        results = relaxation_trials(args.trials, args.seed)
        failures = [i for i, res in enumerate(results) if not res.holds]
        worst = max(res.lhs - res.rhs for res in results) if results else 0.0
        print(f"stream relaxation bound: {len(results) - len(failures)}/{len(results)} hold; "
              f"max(lhs - rhs) = {worst:.3e}")
    else:
        results = subspace_gap_trials(args.trials, args.seed)
        failures = [i for i, res in enumerate(results) if not res.holds]
        worst = max(res.excess - res.bound_factor for res in results) if results else 0.0
        print(f"subspace excess bound: {len(results) - len(failures)}/{len(results)} hold; "
              f"max(excess - bound) = {worst:.3e}")
    if failures:
        print(f"violations in trials {failures}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


_COMMANDS = {
    "synth": _cmd_synth,
    "train": _cmd_train,
    "eval": _cmd_eval,
    "sweep": _cmd_sweep,
    "validate": _cmd_validate,
}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return _COMMANDS[args.command](args)
    except FormatError as exc:
        print(f"data format error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"cannot read or write file: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ShapeError, ValueError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except TensorSketchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
