"""Command-line interface: dataset generation, training, ablations, sweeps.

Commands write machine-readable artifacts into a run directory: model files,
config snapshots, a deterministic metrics.json per experiment (timings are
kept separately in result.json so re-runs are byte-identical), and CSV
report tables.

Exit codes: 0 success, 1 usage or config error, 2 data error, 3 numeric
failure (non-finite loss). Each failure prints a one-line diagnostic on
stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

from .data import (
    ImbalanceProfile,
    class_counts,
    load_dataset,
    make_exponential_counts,
    save_dataset,
    synth_gaussian_mixture,
    balanced_eval_split,
)
from .losses import LossConfig
from .nets import load_net, save_net
from .numerics import Rng
from .rectify import save_ideal_means
from .trainer import (
    TrainConfig,
    count_sorted_thirds,
    evaluate,
    pretrain_teacher,
    save_result,
    train_student,
)
from .validation import MissingClassError, NumericError, ParseError

COMMANDS = ("gen-data", "pretrain", "distill", "evaluate", "ablate", "sweep", "report")

# canonical variant order for reports (short labels)
VARIANT_ORDER = ("ce", "vkd", "rrd_only", "lrd_only", "krd")
VARIANT_LABELS = {"ce": "ce", "vkd": "vkd", "rrd_only": "rrd", "lrd_only": "lrd", "krd": "krd"}
LABEL_TO_VARIANT = {v: k for k, v in VARIANT_LABELS.items()}

SWEEP_PARAMS = ("beta", "alpha", "tau", "projector_layers")
SWEEP_DEFAULTS = {"beta": 10.0, "alpha": 0.8, "tau": 2.0, "projector_layers": 3.0}

ENV_SEED = "KRD_SEED"
ENV_OUT = "KRD_OUT"


class ConfigError(Exception):
    """Bad usage, flags, or config file (exit code 1)."""


@dataclass
class RunSpec:
    command: str
    data: str | None = None
    teacher: str | None = None
    model: str | None = None
    out: str = "."
    seeds: list = field(default_factory=lambda: [0])
    epochs: int = 60
    batch_size: int = 128
    lr: float = 0.005
    momentum: float = 0.9
    weight_decay: float = 5e-4
    beta: float = 10.0
    alpha: float = 0.8
    tau: float = 2.0
    projector_layers: int = 3
    variant: str = "krd"
    rho: float = 100.0
    classes: int = 10
    dim: int = 32
    n_max: int = 1000
    eval_per_class: int = 100
    spread: float = 6.0
    sigma: float = 1.0
    parallel: int = 1
    param: str | None = None
    values: list | None = None
    per_class: bool = False

    def train_config(self, seed: int, variant: str | None = None) -> TrainConfig:
        return TrainConfig(
            epochs=self.epochs, batch_size=self.batch_size, base_lr=self.lr,
            momentum=self.momentum, weight_decay=self.weight_decay, seed=seed,
            loss=LossConfig(beta=self.beta, tau=self.tau, alpha=self.alpha),
            projector_layers=self.projector_layers,
            variant=variant or self.variant)


def _parse_int(v):
    return int(v)


def _parse_float(v):
    return float(v)


def _parse_bool(v):
    low = str(v).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {v!r}")


def _parse_seed_list(v):
    return [int(tok) for tok in str(v).split(",") if tok.strip() != ""]


def _parse_float_list(v):
    return [float(tok) for tok in str(v).split(",") if tok.strip() != ""]


def _parse_variant(v):
    name = str(v).strip()
    name = LABEL_TO_VARIANT.get(name, name)
    if name not in VARIANT_ORDER:
        allowed = sorted(set(VARIANT_ORDER) | set(VARIANT_LABELS.values()))
        raise ValueError(f"unknown variant {v!r}, expected one of {allowed}")
    return name


# config-file key -> (RunSpec field, value parser, human-readable type)
CONFIG_KEYS = {
    "data": ("data", str, "path"),
    "teacher": ("teacher", str, "path"),
    "model": ("model", str, "path"),
    "out": ("out", str, "path"),
    "seed": ("seeds", _parse_seed_list, "integer list"),
    "epochs": ("epochs", _parse_int, "integer"),
    "batch_size": ("batch_size", _parse_int, "integer"),
    "lr": ("lr", _parse_float, "number"),
    "momentum": ("momentum", _parse_float, "number"),
    "weight_decay": ("weight_decay", _parse_float, "number"),
    "beta": ("beta", _parse_float, "number"),
    "alpha": ("alpha", _parse_float, "number"),
    "tau": ("tau", _parse_float, "number"),
    "projector_layers": ("projector_layers", _parse_int, "integer"),
    "variant": ("variant", _parse_variant, "variant name"),
    "rho": ("rho", _parse_float, "number"),
    "classes": ("classes", _parse_int, "integer"),
    "dim": ("dim", _parse_int, "integer"),
    "n_max": ("n_max", _parse_int, "integer"),
    "eval_per_class": ("eval_per_class", _parse_int, "integer"),
    "spread": ("spread", _parse_float, "number"),
    "sigma": ("sigma", _parse_float, "number"),
    "parallel": ("parallel", _parse_int, "integer"),
    "param": ("param", str, "name"),
    "values": ("values", _parse_float_list, "number list"),
    "per_class": ("per_class", _parse_bool, "boolean"),
}


def parse_config(path, command: str = "distill") -> RunSpec:
    """Parse a `key = value` config file into a RunSpec.

    Section headers like `[training]` are allowed and ignored (keys live in
    one flat namespace); `#` starts a comment line. Unknown keys and type
    mismatches are rejected with the offending line number.
    """
    spec = RunSpec(command=command)
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{ln}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in CONFIG_KEYS:
            raise ConfigError(f"{path}:{ln}: unknown key {key!r}")
        attr, parser, kind = CONFIG_KEYS[key]
        try:
            setattr(spec, attr, parser(value))
        except ValueError:
            raise ConfigError(
                f"{path}:{ln}: key {key!r} expects {kind}, got {value!r}") from None
    return spec


def build_runspec(args, environ) -> RunSpec:
    """Layer defaults < config file < environment < flags."""
    if args.config:
        spec = parse_config(args.config, args.command)
    else:
        spec = RunSpec(command=args.command)
    spec.command = args.command

    if environ.get(ENV_SEED) is not None:
        try:
            spec.seeds = _parse_seed_list(environ[ENV_SEED])
        except ValueError:
            raise ConfigError(f"{ENV_SEED} must be an integer list, "
                              f"got {environ[ENV_SEED]!r}") from None
    if environ.get(ENV_OUT):
        spec.out = environ[ENV_OUT]

    for key, (attr, parser, kind) in CONFIG_KEYS.items():
        flag = key if key != "seed" else "seed"
        value = getattr(args, flag, None)
        if value is None:
            continue
        try:
            setattr(spec, attr, parser(value) if isinstance(value, str) else value)
        except ValueError:
            raise ConfigError(f"--{flag.replace('_', '-')} expects {kind}, "
                              f"got {value!r}") from None
    _validate_spec(spec)
    return spec


def _validate_spec(spec: RunSpec):
    if spec.command not in COMMANDS:
        raise ConfigError(f"unknown command {spec.command!r}")
    if not spec.seeds:
        raise ConfigError("at least one seed is required")
    if spec.epochs < 1 or spec.batch_size < 1:
        raise ConfigError("epochs and batch_size must be >= 1")
    if spec.lr <= 0:
        raise ConfigError("lr must be positive")
    if not 0.0 < spec.alpha < 1.0:
        raise ConfigError("alpha must lie in (0, 1)")
    if spec.tau <= 0:
        raise ConfigError("tau must be positive")
    if spec.beta < 0:
        raise ConfigError("beta must be >= 0")
    if spec.rho < 1.0:
        raise ConfigError("rho must be >= 1")
    if spec.parallel < 1:
        raise ConfigError("parallel must be >= 1")


# ---------------------------------------------------------------------------
# artifact helpers


def _out_dir(spec) -> Path:
    out = Path(spec.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_train_eval(spec):
    if spec.data is None:
        raise ConfigError(f"command {spec.command!r} requires --data")
    root = Path(spec.data)
    if not root.is_dir():
        raise ConfigError(f"--data must be a directory holding train.csv and eval.csv, "
                          f"got {spec.data!r}")
    train = load_dataset(root / "train.csv")
    eva = load_dataset(root / "eval.csv", n_classes=train.n_classes)
    return train, eva


def _write_json(path, payload):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _experiment_dir(root: Path, name: str) -> Path:
    d = root / "runs" / name
    d.mkdir(parents=True, exist_ok=True)
    return d


def _run_one(spec: RunSpec, variant: str, seed: int, teacher, train, eva,
             run_dir: Path, config: TrainConfig | None = None) -> dict:
    """Train one experiment and persist every artifact into run_dir."""
    cfg = config or spec.train_config(seed, variant)
    cfg = replace(cfg, variant=variant, seed=seed)
    artifacts = {}
    student, projector, result = train_student(cfg, teacher, train, eva,
                                               artifacts=artifacts)
    save_net(student, run_dir / "student.krdnet")
    if projector is not None:
        save_net(projector, run_dir / "projector.krdnet")
    if "ideal_means" in artifacts:
        save_ideal_means(artifacts["ideal_means"], run_dir / "ideal_means.krdmeans")
    _write_json(run_dir / "config.json", result.config)
    _write_json(run_dir / "metrics.json", result.to_dict(include_timings=False))
    save_result(result, run_dir / "result.json")
    return result.to_dict(include_timings=False)


# ---------------------------------------------------------------------------
# commands


def cmd_gen_data(spec: RunSpec) -> int:
    out = _out_dir(spec)
    profile = ImbalanceProfile(spec.classes, spec.n_max, spec.rho)
    counts = make_exponential_counts(profile)
    seed = spec.seeds[0]
    rng = Rng(seed)
    train = synth_gaussian_mixture(rng, counts, spec.dim, spec.spread, spec.sigma)
    eva = balanced_eval_split(rng, spec.eval_per_class, spec.classes, spec.dim,
                              spec.spread, spec.sigma)
    save_dataset(train, out / "train.csv")
    save_dataset(eva, out / "eval.csv")
    _write_json(out / "data_config.json", {
        "classes": spec.classes, "dim": spec.dim, "rho": spec.rho,
        "n_max": spec.n_max, "eval_per_class": spec.eval_per_class,
        "spread": spec.spread, "sigma": spec.sigma, "seed": seed,
        "train_counts": [int(c) for c in counts],
    })
    print(f"wrote {train.n_examples} train / {eva.n_examples} eval examples to {out}")
    return 0


def cmd_pretrain(spec: RunSpec) -> int:
    train, eva = _load_train_eval(spec)
    out = _out_dir(spec)
    seed = spec.seeds[0]
    teacher = pretrain_teacher(spec.train_config(seed), train)
    path = out / "teacher.krdnet"
    save_net(teacher, path)
    metrics = evaluate(teacher, eva, count_sorted_thirds(class_counts(train)))
    _write_json(out / "teacher_metrics.json", metrics.to_dict())
    print(f"teacher saved to {path}; overall={metrics.overall_top1:.4f} "
          f"head={metrics.group_top1['head']:.4f} tail={metrics.group_top1['tail']:.4f}")
    return 0


def _load_teacher(spec) -> "FeedForwardNet | None":
    if spec.teacher is None:
        return None
    return load_net(spec.teacher)


def cmd_distill(spec: RunSpec) -> int:
    train, eva = _load_train_eval(spec)
    teacher = _load_teacher(spec)
    if teacher is None and spec.variant != "ce":
        raise ConfigError(f"variant {spec.variant!r} requires --teacher")
    out = _out_dir(spec)
    seed = spec.seeds[0]
    run_dir = _experiment_dir(out, f"{VARIANT_LABELS[spec.variant]}-s{seed}")
    metrics = _run_one(spec, spec.variant, seed, teacher, train, eva, run_dir)
    m = metrics["metrics"]
    print(f"{VARIANT_LABELS[spec.variant]} seed={seed} overall={m['overall_top1']:.4f} "
          f"head={m['group_top1']['head']:.4f} tail={m['group_top1']['tail']:.4f} "
          f"-> {run_dir}")
    return 0


def cmd_evaluate(spec: RunSpec) -> int:
    if spec.model is None:
        raise ConfigError("evaluate requires --model")
    train, eva = _load_train_eval(spec)
    net = load_net(spec.model)
    metrics = evaluate(net, eva, count_sorted_thirds(class_counts(train)))
    payload = metrics.to_dict()
    print(json.dumps(payload, indent=2, sort_keys=True))
    if spec.out != ".":
        out = _out_dir(spec)
        _write_json(out / "eval_metrics.json", payload)
    return 0


def _ablate_seed(payload) -> None:
    """One ablation seed: pretrain (or load) the teacher, run all variants."""
    spec, seed = payload
    train, eva = _load_train_eval(spec)
    out = Path(spec.out)
    if spec.teacher is not None:
        teacher = load_net(spec.teacher)
    else:
        teacher = pretrain_teacher(spec.train_config(seed), train)
        tdir = out / "teachers"
        tdir.mkdir(parents=True, exist_ok=True)
        save_net(teacher, tdir / f"teacher-s{seed}.krdnet")
    for variant in VARIANT_ORDER:
        run_dir = _experiment_dir(out, f"{VARIANT_LABELS[variant]}-s{seed}")
        _run_one(spec, variant, seed, teacher if variant != "ce" else None,
                 train, eva, run_dir)


def _dispatch(tasks, worker, parallel):
    if parallel <= 1:
        for t in tasks:
            worker(t)
        return
    with ProcessPoolExecutor(max_workers=parallel) as pool:
        for result in pool.map(worker, tasks):
            pass  # exceptions propagate here


def _check_teacher_path(spec):
    if spec.teacher is not None and not Path(spec.teacher).is_file():
        raise FileNotFoundError(f"teacher model not found: {spec.teacher}")


def cmd_ablate(spec: RunSpec) -> int:
    out = _out_dir(spec)
    _load_train_eval(spec)  # fail fast on data problems
    _check_teacher_path(spec)
    manifest = {"kind": "ablate", "seeds": sorted(spec.seeds),
                "per_class": spec.per_class}
    _write_json(out / "manifest.json", manifest)
    try:
        _dispatch([(spec, s) for s in sorted(spec.seeds)], _ablate_seed, spec.parallel)
    except Exception:
        (out / "PARTIAL").write_text("ablation aborted before completion\n")
        raise
    _write_ablate_report(out, manifest)
    print(f"ablation report written to {out / 'report.csv'}")
    return 0


def _metrics_for(out: Path, name: str) -> dict:
    path = out / "runs" / name / "metrics.json"
    if not path.exists():
        raise ParseError(f"missing run artifact {path}")
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _report_row(label, seed, doc, per_class):
    m = doc["metrics"]
    row = [label, str(seed), f"{m['overall_top1']:.6f}",
           f"{m['group_top1']['head']:.6f}", f"{m['group_top1']['medium']:.6f}",
           f"{m['group_top1']['tail']:.6f}"]
    if per_class:
        row.extend(f"{v:.6f}" for v in m["per_class_top1"])
    return row


def _mean_row(label, rows):
    cols = len(rows[0])
    means = [label, "mean"]
    for j in range(2, cols):
        means.append(f"{sum(float(r[j]) for r in rows) / len(rows):.6f}")
    return means


def _write_ablate_report(out: Path, manifest) -> None:
    seeds = manifest["seeds"]
    per_class = manifest.get("per_class", False)
    header = ["variant", "seed", "overall", "head", "medium", "tail"]
    if per_class:
        sample = _metrics_for(out, f"ce-s{seeds[0]}")
        header.extend(f"class{j}" for j in range(len(sample["metrics"]["per_class_top1"])))
    lines = [",".join(header)]
    for variant in VARIANT_ORDER:
        label = VARIANT_LABELS[variant]
        rows = [_report_row(label, s, _metrics_for(out, f"{label}-s{s}"), per_class)
                for s in seeds]
        lines.extend(",".join(r) for r in rows)
        lines.append(",".join(_mean_row(label, rows)))
    (out / "report.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")


def _sweep_value_tag(value: float) -> str:
    return f"{value:g}"


def _validate_sweep(spec):
    if spec.param is None or spec.param not in SWEEP_PARAMS:
        raise ConfigError(f"sweep parameter must be one of {list(SWEEP_PARAMS)}, "
                          f"got {spec.param!r}")
    if not spec.values:
        raise ConfigError("sweep requires --values")
    for v in spec.values:
        if spec.param == "alpha" and not 0.0 < v < 1.0:
            raise ConfigError(f"alpha value {v} outside (0, 1)")
        if spec.param == "tau" and v <= 0:
            raise ConfigError(f"tau value {v} must be positive")
        if spec.param == "beta" and v < 0:
            raise ConfigError(f"beta value {v} must be >= 0")
        if spec.param == "projector_layers" and (v < 0 or v != int(v)):
            raise ConfigError(f"projector_layers value {v} must be a nonnegative integer")


def _sweep_task(payload) -> None:
    spec, value, seed = payload
    train, eva = _load_train_eval(spec)
    out = Path(spec.out)
    if spec.teacher is not None:
        teacher = load_net(spec.teacher)
    else:
        tpath = out / "teachers" / f"teacher-s{seed}.krdnet"
        teacher = load_net(tpath)
    swept = replace(spec, **{spec.param: int(value) if spec.param == "projector_layers"
                             else value})
    run_dir = _experiment_dir(out, f"{spec.param}-{_sweep_value_tag(value)}-s{seed}")
    _run_one(swept, "krd", seed, teacher, train, eva, run_dir)


def cmd_sweep(spec: RunSpec) -> int:
    _validate_sweep(spec)
    out = _out_dir(spec)
    train, _ = _load_train_eval(spec)
    _check_teacher_path(spec)
    manifest = {"kind": "sweep", "param": spec.param,
                "values": [float(v) for v in spec.values],
                "seeds": sorted(spec.seeds), "per_class": spec.per_class}
    _write_json(out / "manifest.json", manifest)
    try:
        if spec.teacher is None:
            tdir = out / "teachers"
            tdir.mkdir(parents=True, exist_ok=True)
            for seed in sorted(spec.seeds):
                teacher = pretrain_teacher(spec.train_config(seed), train)
                save_net(teacher, tdir / f"teacher-s{seed}.krdnet")
        tasks = [(spec, v, s) for v in spec.values for s in sorted(spec.seeds)]
        _dispatch(tasks, _sweep_task, spec.parallel)
    except Exception:
        (out / "PARTIAL").write_text("sweep aborted before completion\n")
        raise
    _write_sweep_report(out, manifest)
    print(f"sweep report written to {out / 'sweep_report.csv'}")
    return 0


def _write_sweep_report(out: Path, manifest) -> None:
    param = manifest["param"]
    seeds = manifest["seeds"]
    default = SWEEP_DEFAULTS[param]
    header = ["param", "value", "seed", "is_default", "overall", "head", "medium", "tail"]
    lines = [",".join(header)]
    for value in manifest["values"]:
        tag = _sweep_value_tag(value)
        flag = "1" if value == default else "0"
        rows = []
        for s in seeds:
            doc = _metrics_for(out, f"{param}-{tag}-s{s}")
            m = doc["metrics"]
            rows.append([param, tag, str(s), flag, f"{m['overall_top1']:.6f}",
                         f"{m['group_top1']['head']:.6f}",
                         f"{m['group_top1']['medium']:.6f}",
                         f"{m['group_top1']['tail']:.6f}"])
        lines.extend(",".join(r) for r in rows)
        mean = [param, tag, "mean", flag]
        for j in range(4, 8):
            mean.append(f"{sum(float(r[j]) for r in rows) / len(rows):.6f}")
        lines.append(",".join(mean))
    (out / "sweep_report.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")


def cmd_report(spec: RunSpec) -> int:
    out = Path(spec.out)
    manifest_path = out / "manifest.json"
    if not manifest_path.exists():
        raise ConfigError(f"no manifest.json under {out}; run ablate or sweep first")
    with open(manifest_path, "r", encoding="utf-8") as fh:
        manifest = json.load(fh)
    if manifest.get("kind") == "sweep":
        _write_sweep_report(out, manifest)
        print(f"sweep report regenerated at {out / 'sweep_report.csv'}")
    else:
        _write_ablate_report(out, manifest)
        print(f"ablation report regenerated at {out / 'report.csv'}")
    return 0


# ---------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); usage errors are exit 1
        raise ConfigError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="krdistill",
                     description="Rectified knowledge distillation lab for "
                                 "long-tailed classification")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="key = value config file")
        p.add_argument("--data", help="dataset directory (train.csv + eval.csv)")
        p.add_argument("--teacher", help="teacher model file")
        p.add_argument("--model", help="model file to evaluate")
        p.add_argument("--out", help="output directory")
        p.add_argument("--seed", help="seed or comma-separated seed list")
        p.add_argument("--epochs", help="training epochs")
        p.add_argument("--batch-size", dest="batch_size", help="minibatch size")
        p.add_argument("--lr", help="base learning rate (cosine-decayed)")
        p.add_argument("--momentum", help="SGD momentum")
        p.add_argument("--weight-decay", dest="weight_decay", help="L2 weight decay")
        p.add_argument("--beta", help="feature-rectification loss weight")
        p.add_argument("--alpha", help="class-mean EMA rate, in (0, 1)")
        p.add_argument("--tau", help="distillation temperature")
        p.add_argument("--projector-layers", dest="projector_layers",
                       help="projector hidden layer count")
        p.add_argument("--variant", help="ce | vkd | rrd | lrd | krd")
        p.add_argument("--rho", help="imbalance rate (most/least frequent)")
        p.add_argument("--classes", help="class count for gen-data")
        p.add_argument("--dim", help="feature dimension for gen-data")
        p.add_argument("--n-max", dest="n_max", help="largest class size for gen-data")
        p.add_argument("--eval-per-class", dest="eval_per_class",
                       help="balanced eval examples per class")
        p.add_argument("--spread", help="class center radius")
        p.add_argument("--sigma", help="within-class noise scale")
        p.add_argument("--parallel", help="concurrent experiments for ablate/sweep")
        p.add_argument("--param", help="sweep parameter name")
        p.add_argument("--values", help="comma-separated sweep values")
        p.add_argument("--per-class", dest="per_class", action="store_const",
                       const=True, default=None, help="add per-class report columns")
    return parser


COMMAND_HANDLERS = {
    "gen-data": cmd_gen_data,
    "pretrain": cmd_pretrain,
    "distill": cmd_distill,
    "evaluate": cmd_evaluate,
    "ablate": cmd_ablate,
    "sweep": cmd_sweep,
    "report": cmd_report,
}


def main(argv=None) -> int:
    import os

    try:
        args = _build_parser().parse_args(argv)
        spec = build_runspec(args, os.environ)
        return COMMAND_HANDLERS[spec.command](spec)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3
    except (ParseError, MissingClassError, FileNotFoundError, NotADirectoryError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
