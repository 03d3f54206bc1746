"""Command-line experiments: ``mimgan <subcommand> [flags]``.

Every run writes its outputs plus one ``manifest.json`` into ``--out``.
The manifest records the argument vector with the seed made explicit, so
``mimgan replay <manifest>`` reruns the command and reproduces every output
file byte for byte (the manifest's own ``duration_s`` field is the one
value that differs between runs).

Exit codes: 0 success, 1 usage error or missing input file, 2 runtime
failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
import traceback
from pathlib import Path

import numpy as np

from . import __version__
from ._alloc import tune_allocator
from .analysis import (
    BinaryPerturbation,
    Mode,
    StabilityScenario,
    rare_event_proportion,
    renyi_divergence,
    stability_factor,
)
from .anomaly import (
    AUTO,
    AnomalyConfig,
    classify,
    read_score_report,
    score_samples,
    summary,
    write_score_report,
    write_summary,
)
from .data import (
    MinMaxStats,
    SplitMode,
    load_tabular_csv,
    normalize_split,
    sample_gaussian,
    split_train_test,
    synth_anomaly_benchmark,
    write_tabular_csv,
)
from .metrics import f1_score, roc_auc
from .objectives import EQUILIBRIUM, ObjectiveKind, equilibrium_objective
from .serialization import load_model, save_model
from .training import (
    CURVE_BATCH,
    GanConfig,
    TrainingDiverged,
    TrainingLog,
    sample,
    train_adversarial,
    train_generator_fixed_discriminator,
    trailing_variance,
)

SEED_ENV = "MIMGAN_SEED"
MANIFEST = "manifest.json"
GAUSS_MU, GAUSS_SIGMA, GAUSS_N = 4.0, 1.25, 16_000
UPSILON_P = (1e-4, 3e-4, 1e-3, 3e-3, 0.01, 0.02, 0.05)
UPSILON_GAMMA = (1.0, 1.5, 2.0)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# ----------------------------------------------------------------------
# argument types
# ----------------------------------------------------------------------
def _u64(text: str) -> int:
    try:
        v = int(text, 10)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError(f"seed must be an unsigned 64-bit integer, got {v}")
    return v


def _count(text: str) -> int:
    try:
        v = int(text, 10)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be non-negative, got {v}")
    return v


def _positive(text: str) -> int:
    v = _count(text)
    if v == 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _real(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"must be finite, got {text!r}")
    return v


def _open_unit(text: str) -> float:
    v = _real(text)
    if not 0 < v < 1:
        raise argparse.ArgumentTypeError(f"must lie in (0, 1), got {v}")
    return v


def _reals(text: str) -> list[float]:
    return [_real(t) for t in text.split(",") if t.strip()]


def _threshold(text: str):
    return AUTO if text == AUTO else _real(text)


def _data_source(text: str) -> str:
    if text in ("gauss", "synth") or (text.startswith("csv:") and len(text) > 4):
        return text
    raise argparse.ArgumentTypeError(f"expected gauss, synth or csv:<path>, got {text!r}")


def _hidden(text: str) -> tuple:
    try:
        sizes = tuple(int(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated sizes, got {text!r}") from None
    if not sizes or min(sizes) < 1:
        raise argparse.ArgumentTypeError("hidden sizes must be positive")
    return sizes


# ----------------------------------------------------------------------
# parser
# ----------------------------------------------------------------------
def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mimgan", description="MIM-based GAN experiments.")
    parser.add_argument("--version", action="version", version=f"mimgan {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    common = _Parser(add_help=False)
    common.add_argument("--seed", type=_u64, default=None,
                        help=f"random seed (default: ${SEED_ENV}, else 0)")
    common.add_argument("--out", default="mimgan-out", help="output directory")

    net = _Parser(add_help=False)
    net.add_argument("--hidden", type=_hidden, default=None, help="hidden layer sizes, e.g. 64 or 64,64")
    net.add_argument("--latent-dim", type=_positive, default=8)
    net.add_argument("--optimizer", choices=("adam", "sgd"), default=None)
    net.add_argument("--lr", type=_real, default=1e-3)
    net.add_argument("--batch", type=_positive, default=256)

    p = sub.add_parser("synth", parents=[common], help="write a synthetic dataset")
    p.add_argument("--data", type=_data_source, default="synth")
    p.add_argument("--n", type=_count, default=GAUSS_N, help="Gaussian sample count")
    p.add_argument("--n-normal", type=_count, default=950)
    p.add_argument("--n-anomaly", type=_count, default=50)
    p.add_argument("--dim", type=_positive, default=6)
    p.add_argument("--separation", type=_real, default=3.0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", parents=[common, net], help="adversarial training")
    p.add_argument("--objective", choices=[k.value for k in ObjectiveKind], default="mim")
    p.add_argument("--data", type=_data_source, default="gauss")
    p.add_argument("--label-col", default=None)
    p.add_argument("--iters", type=_count, default=2000)
    p.add_argument("--d-steps", type=_positive, default=1)
    p.add_argument("--train-fraction", type=_open_unit, default=0.8)
    p.add_argument("--samples", type=_count, default=10_000,
                   help="generated rows summarized in samples.json")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("curves", parents=[common, net],
                       help="fixed-discriminator generator curves")
    p.add_argument("--objective", action="append", choices=[k.value for k in ObjectiveKind],
                   help="repeatable; default: all five")
    p.add_argument("--d-pretrain", action="append", type=int, choices=(500, 1000, 1500),
                   help="repeatable; default: 500, 1000 and 1500")
    p.add_argument("--data", type=_data_source, default="gauss")
    p.add_argument("--label-col", default=None)
    p.add_argument("--iters", type=_count, default=700, help="phase-2 generator steps")
    p.add_argument("--curve-batch", type=_positive, default=CURVE_BATCH)
    p.add_argument("--window", type=_positive, default=500)
    p.set_defaults(func=cmd_curves)

    p = sub.add_parser("analyze", parents=[common], help="closed-form tables")
    p.add_argument("--table", choices=("upsilon", "stability", "renyi"), required=True)
    p.add_argument("--p", type=_reals, default=None, help="comma-separated values")
    p.add_argument("--eps", type=_reals, default=None, help="comma-separated values")
    p.add_argument("--gamma", type=_reals, default=None, help="comma-separated values")
    p.add_argument("--q", type=_reals, default=None, help="comma-separated values (renyi table)")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("detect", parents=[common], help="score a test CSV")
    p.add_argument("--models", required=True, help="directory written by `train`")
    p.add_argument("--test", required=True, help="CSV of rows to score")
    p.add_argument("--label-col", default=None)
    p.add_argument("--lambda", dest="lam", type=_open_unit, default=0.1)
    p.add_argument("--eta", type=_open_unit, default=0.05)
    p.add_argument("--gamma-threshold", type=_threshold, default=AUTO)
    p.add_argument("--inv-iters", type=_count, default=500)
    p.add_argument("--inv-lr", type=_real, default=0.003)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("eval", parents=[common], help="ROC/AUC/F1 from a score report")
    p.add_argument("--scores", required=True)
    p.add_argument("--gamma-threshold", type=_threshold, default=None,
                   help="re-decide with this threshold instead of the report's decisions")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("replay", help="rerun the command recorded in a manifest")
    p.add_argument("manifest")
    p.add_argument("--out", default=None, help="write to this directory instead")
    p.set_defaults(func=None)
    return parser


# ----------------------------------------------------------------------
# helpers
# ----------------------------------------------------------------------
class _Run:
    """Output directory bookkeeping for one command."""

    def __init__(self, out: str):
        self.out = Path(out)
        self.out.mkdir(parents=True, exist_ok=True)
        self.outputs: list[str] = []

    def path(self, name: str) -> Path:
        self.outputs.append(name)
        return self.out / name

    def write_json(self, name: str, doc) -> None:
        with open(self.path(name), "w") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")


def _require_file(path) -> None:
    if not os.path.isfile(path):
        raise FileNotFoundError(2, "No such file", str(path))


def _load_csv(path: str, label_col):
    _require_file(path)
    return load_tabular_csv(path, label_col)


def _training_data(args):
    """``(train, test, stats)``; synthetic and CSV features are min-max normalized."""
    src = args.data
    if src == "gauss":
        return sample_gaussian(GAUSS_MU, GAUSS_SIGMA, GAUSS_N, args.seed), None, None
    if src == "synth":
        ds = synth_anomaly_benchmark(950, 50, 6, 3.0, args.seed)
    else:
        ds = _load_csv(src[4:], args.label_col)
    if ds.labels is None:
        stats = MinMaxStats.fit(ds.features)
        return ds.normalized(stats), None, stats
    train, test = split_train_test(ds, getattr(args, "train_fraction", 0.8), SplitMode.NORMAL_ONLY_TRAIN, args.seed)
    train_n, _ = normalize_split(train, test)
    return train_n, test, train_n.stats


def _gan_config(args, objective, optimizer_default="adam", hidden_default=(64,)):
    opt = args.optimizer or optimizer_default
    hidden = args.hidden or hidden_default
    return GanConfig(objective=objective, latent_dim=args.latent_dim,
                     gen_hidden=hidden, disc_hidden=hidden,
                     g_optimizer=opt, d_optimizer=opt, g_lr=args.lr, d_lr=args.lr,
                     batch_size=args.batch, iterations=getattr(args, "iters", 0),
                     d_steps_per_g_step=getattr(args, "d_steps", 1), seed=args.seed)


def _config_doc(args) -> dict:
    doc = {}
    for k, v in sorted(vars(args).items()):
        if k == "func":
            continue
        doc[k] = list(v) if isinstance(v, tuple) else v
    return doc


# ----------------------------------------------------------------------
# subcommands
# ----------------------------------------------------------------------
def cmd_synth(args, run: _Run) -> None:
    if args.data == "gauss":
        ds = sample_gaussian(GAUSS_MU, GAUSS_SIGMA, args.n, args.seed)
    elif args.data == "synth":
        ds = synth_anomaly_benchmark(args.n_normal, args.n_anomaly, args.dim,
                                     args.separation, args.seed)
    else:
        raise UsageError("synth: --data must be gauss or synth")
    write_tabular_csv(ds, run.path("data.csv"))


def cmd_train(args, run: _Run) -> None:
    train, test, stats = _training_data(args)
    cfg = _gan_config(args, args.objective)
    meta = {
        "config": cfg.to_dict(),
        "data": args.data,
        "feature_names": list(train.feature_names),
        "stats": None if stats is None else stats.to_dict(),
    }
    log_path = run.path("log.csv")
    try:
        G, D, log = train_adversarial(cfg, train.features)
    except TrainingDiverged as exc:
        exc.log.to_csv(log_path)
        raise
    log.to_csv(log_path)
    save_model(run.path("generator.mimgan"), G, {**meta, "role": "generator"})
    save_model(run.path("discriminator.mimgan"), D, {**meta, "role": "discriminator"})
    if test is not None:
        write_tabular_csv(test, run.path("test.csv"))
    if args.samples:
        x = sample(G, args.samples, args.seed)
        if stats is not None:
            x = stats.invert(x)
        run.write_json("samples.json", {
            "n": args.samples,
            "mean": x.mean(axis=0).tolist(),
            "std": x.std(axis=0).tolist(),
            "feature_names": list(train.feature_names),
        })


def _curve_summary(log: TrainingLog, window: int) -> dict:
    g = np.asarray(log.g_loss)
    out = {"iterations": len(log)}
    if g.size >= window:
        out["trailing_variance"] = trailing_variance(g, window)
    if g.size >= 100:
        out["leading_mean_100"] = float(g[:100].mean())
        out["trailing_mean_100"] = float(g[-100:].mean())
    return out


def cmd_curves(args, run: _Run) -> None:
    objectives = args.objective or [k.value for k in ObjectiveKind]
    pretrain = args.d_pretrain or [500, 1000, 1500]
    train, _, _ = _training_data(args)
    results = {}
    for kind in dict.fromkeys(objectives):
        cfg = _gan_config(args, kind, optimizer_default="sgd", hidden_default=(16,))
        for n in dict.fromkeys(pretrain):
            name = f"curve_{kind}_N{n}.csv"
            try:
                log = train_generator_fixed_discriminator(cfg, train.features, n, args.iters,
                                                          args.curve_batch)
                entry = _curve_summary(log, args.window)
            except TrainingDiverged as exc:
                log = exc.log
                entry = {**_curve_summary(log, args.window), "diverged_at": exc.iteration,
                         "error": str(exc)}
            log.to_csv(run.path(name))
            results[f"{kind}/N{n}"] = {"objective": kind, "d_pretrain": n, "file": name, **entry}
    run.write_json("curves.json", {"curve": "g_loss", "window": args.window, "runs": results})


def _upsilon_rows(args):
    explicit = args.p is not None or args.eps is not None or args.gamma is not None
    ps = args.p or list(UPSILON_P)
    eps = args.eps or (np.round(np.linspace(-0.2, 0.2, 41), 12) + 0.0).tolist()
    gammas = args.gamma or list(UPSILON_GAMMA)
    for p in ps:
        for g in gammas:
            for e in eps:
                try:
                    bp = BinaryPerturbation(p, e, g)
                except ValueError as exc:
                    if explicit:
                        raise UsageError(f"analyze: {exc}") from None
                    continue
                vals = [rare_event_proportion(k, m, bp)
                        for m in (Mode.EXACT, Mode.APPROX)
                        for k in (ObjectiveKind.MIM, ObjectiveKind.KL_SATURATING)]
                yield [p, e, g, bp.q, *vals]


def _stability_rows(args):
    eps = args.eps or (np.round(np.linspace(-0.45, 0.95, 29), 12) + 0.0).tolist()
    kinds = (ObjectiveKind.MIM, ObjectiveKind.KL_SATURATING, ObjectiveKind.KL_NONSATURATING)
    for scenario in StabilityScenario:
        for e in eps:
            row = [scenario.value, e]
            try:
                for k in kinds:
                    row.append(stability_factor(k, scenario, e))
            except (ValueError, ZeroDivisionError):
                if args.eps is not None and len(row) == 2:
                    raise UsageError(f"analyze: eps={e} is outside the {scenario.value} range") from None
                if len(row) == 2:
                    continue
                row.extend([""] * (2 + len(kinds) - len(row)))
            yield row


def _renyi_rows(args):
    ps = args.p or [0.5]
    qs = args.q or np.round(np.linspace(0.05, 0.95, 19), 12).tolist()
    for p in ps:
        for q in qs:
            if not (0 < p < 1 and 0 < q < 1):
                raise UsageError("analyze: --p and --q values must lie in (0, 1)")
            P, Q = [p, 1 - p], [q, 1 - q]
            r = renyi_divergence(P, Q, 0.5)
            yield [p, q, r, equilibrium_objective(ObjectiveKind.MIM, P, Q),
                   EQUILIBRIUM * math.exp(-0.5 * r)]


_TABLES = {
    "upsilon": (["p", "epsilon", "gamma", "q", "mim_exact", "kl_exact", "mim_approx", "kl_approx"],
                _upsilon_rows),
    "stability": (["scenario", "epsilon", "mim", "kl", "kl_ns"], _stability_rows),
    "renyi": (["p", "q", "renyi_half", "equilibrium", "renyi_form"], _renyi_rows),
}


def _cell(v) -> str:
    return repr(float(v)) if isinstance(v, (float, int, np.floating)) else str(v)


def cmd_analyze(args, run: _Run) -> None:
    header, rows = _TABLES[args.table]
    lines = [",".join(header)] + [",".join(_cell(v) for v in row) for row in rows(args)]
    with open(run.path(f"{args.table}.csv"), "w") as fh:
        fh.write("\n".join(lines) + "\n")


def cmd_detect(args, run: _Run) -> None:
    models = Path(args.models)
    for name in ("generator.mimgan", "discriminator.mimgan"):
        _require_file(models / name)
    G, meta = load_model(models / "generator.mimgan")
    D, _ = load_model(models / "discriminator.mimgan")
    ds = _load_csv(args.test, args.label_col)
    if args.gamma_threshold == AUTO and ds.labels is None:
        raise UsageError("detect: --gamma-threshold auto needs --label-col for a labeled test set")
    x = ds.features
    if meta.get("stats"):
        x = MinMaxStats.from_dict(meta["stats"]).apply(x)
    cfg = AnomalyConfig(lam=args.lam, eta=args.eta, inversion_lr=args.inv_lr,
                        inversion_iters=args.inv_iters, threshold=args.gamma_threshold,
                        seed=args.seed)
    samples = score_samples(x, G, D, cfg, truth=ds.labels)
    labeled, gamma = classify(samples, args.gamma_threshold)
    write_score_report(labeled, run.path("scores.csv"))
    write_summary(summary(labeled, gamma, cfg), run.path("summary.json"))


def cmd_eval(args, run: _Run) -> None:
    _require_file(args.scores)
    samples = read_score_report(args.scores)
    if any(s.truth is None for s in samples):
        raise UsageError(f"eval: {args.scores} lacks ground-truth labels")
    truth = [s.truth for s in samples]
    threshold = None
    if args.gamma_threshold is not None or any(s.decision is None for s in samples):
        samples, threshold = classify(samples, args.gamma_threshold or AUTO)
    roc = roc_auc([s.score for s in samples], truth)
    roc.to_csv(run.path("roc.csv"))
    run.write_json("metrics.json", {
        "auc": roc.auc,
        "f1": f1_score([s.decision for s in samples], truth),
        "n": len(samples),
        "n_anomalies": int(sum(truth)),
        "threshold": threshold,
    })


# ----------------------------------------------------------------------
# dispatch
# ----------------------------------------------------------------------
def _origin(exc: BaseException) -> str:
    """Dotted module name of the innermost package frame that raised ``exc``."""
    pkg = Path(__file__).resolve().parent
    name = "mimgan"
    for frame in traceback.extract_tb(exc.__traceback__):
        path = Path(frame.filename).resolve()
        if path.parent == pkg:
            name = "mimgan." + path.stem.lstrip("_") if path.stem != "__init__" else "mimgan"
    return name


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env is None or env == "":
        return 0
    try:
        return _u64(env)
    except argparse.ArgumentTypeError as exc:
        raise UsageError(f"mimgan: ${SEED_ENV}: {exc}") from None


def _replay_argv(manifest: str, out: str | None) -> list[str]:
    _require_file(manifest)
    with open(manifest) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise UsageError(f"replay: {manifest}: {exc}") from None
    argv = doc.get("argv")
    if not isinstance(argv, list) or not argv:
        raise UsageError(f"replay: {manifest} has no argv record")
    if out is not None:
        argv = _without_flag(argv, "--out") + ["--out", out]
    return argv


def _without_flag(argv: list[str], flag: str) -> list[str]:
    out, skip = [], False
    for a in argv:
        if skip:
            skip = False
        elif a == flag:
            skip = True
        elif not a.startswith(flag + "="):
            out.append(a)
    return out


def dispatch(argv: list[str]) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "replay":
        return dispatch(_replay_argv(args.manifest, args.out))
    args.seed = _resolve_seed(args)
    start = time.perf_counter()
    run = _Run(args.out)
    args.func(args, run)
    record = _without_flag(_without_flag(list(argv), "--seed"), "--out")
    manifest = {
        "command": args.command,
        "argv": record + ["--seed", str(args.seed), "--out", str(args.out)],
        "config": _config_doc(args),
        "seed": args.seed,
        "version": __version__,
        "outputs": run.outputs,
        "duration_s": time.perf_counter() - start,
    }
    with open(run.out / MANIFEST, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return 0


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    tune_allocator()
    try:
        return dispatch(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"mimgan.cli: error: file not found: {exc.filename}", file=sys.stderr)
        return 1
    except (ValueError, ArithmeticError, RuntimeError, OSError) as exc:
        print(f"{_origin(exc)}: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
