"""Sweep harness: parity targets, competing learners, CSV / SVG output.

Per-trial seeds mix in the learner name and sweep point, so adding a
learner to a config never changes any other learner's rows.
"""

from __future__ import annotations

import json
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .baselines import fit_majority, fit_stumps, fit_tree
from .concepts import build_parity
from .errors import ConfigError
from .generate import random_parity_subset
from .sampling import Distribution, accuracy, derive_seed, draw_sample
from .session import run_teaching_session

IMPACT_MODES = {"impact": "best-fit", "impact-reliable": "reliable"}
BASELINE_FITTERS = {"tree": fit_tree, "stumps": fit_stumps, "majority": fit_majority}
KNOWN_LEARNERS = tuple(IMPACT_MODES) + tuple(BASELINE_FITTERS)

CSV_HEADER = "sweep,learner,n,k,m,trial,seed,accuracy,dont_know_rate,runtime_ms"
MEAN_TRIAL = -1
STDDEV_TRIAL = -2


@dataclass(frozen=True)
class SweepConfig:
    name: str
    kind: str  # "m" varies sample size, "k" varies parity width
    n: int
    trials: int
    seed: int
    values: tuple[int, ...]
    subset: tuple[int, ...] | None = None  # fixed parity bits ("m" sweeps)
    fixed_m: int | None = None  # training size ("k" sweeps)
    learners: tuple[str, ...] = ("impact", "tree", "stumps", "majority")
    test_size: int = 1000
    workers: int = 1
    out_dir: str = "sweep-out"

    def __post_init__(self):
        if self.kind not in ("m", "k"):
            raise ConfigError(f"kind must be 'm' or 'k', got {self.kind!r}")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.n < 1:
            raise ConfigError("n must be >= 1")
        if not self.values:
            raise ConfigError("values must be nonempty")
        if any(v < 1 for v in self.values):
            raise ConfigError("swept values must be positive")
        if self.kind == "m":
            if self.subset is None:
                raise ConfigError("an 'm' sweep needs a fixed parity subset")
            if not all(0 <= b < self.n for b in self.subset):
                raise ConfigError("subset bits must lie in [0, n)")
            if len(set(self.subset)) != len(self.subset):
                raise ConfigError("subset bits must be distinct")
        else:
            if self.fixed_m is None or self.fixed_m < 1:
                raise ConfigError("a 'k' sweep needs a positive fixed m")
            if any(v > self.n for v in self.values):
                raise ConfigError("k values must not exceed n")
        unknown = [l for l in self.learners if l not in KNOWN_LEARNERS]
        if unknown:
            raise ConfigError(f"unknown learners: {unknown}")
        if not self.learners:
            raise ConfigError("learner set must be nonempty")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.test_size < 1:
            raise ConfigError("test_size must be >= 1")


def config_from_dict(raw: dict) -> SweepConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    try:
        kind = raw["kind"]
        if kind == "m":
            values = raw["m_values"]
            subset = raw["subset"]
            fixed_m = None
        else:
            values = raw.get("k_values", raw.get("values"))
            subset = None
            fixed_m = raw.get("m", 75)
        return SweepConfig(
            name=str(raw["name"]),
            kind=str(kind),
            n=int(raw["n"]),
            trials=int(raw["trials"]),
            seed=int(raw["seed"]),
            values=tuple(int(v) for v in values),
            subset=None if subset is None else tuple(int(b) for b in subset),
            fixed_m=None if fixed_m is None else int(fixed_m),
            learners=tuple(raw.get("learners", ("impact", "tree", "stumps", "majority"))),
            test_size=int(raw.get("test_size", 1000)),
            workers=int(raw.get("workers", 1)),
            out_dir=str(raw.get("out_dir", "sweep-out")),
        )
    except KeyError as exc:
        raise ConfigError(f"config missing required field {exc.args[0]!r}") from exc
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"malformed config value: {exc}") from exc


def load_config(path) -> SweepConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return config_from_dict(raw)


@dataclass(frozen=True)
class ResultRow:
    sweep: str
    learner: str
    n: int
    k: int
    m: int
    trial: int
    seed: int
    accuracy: float
    dont_know_rate: float
    runtime_ms: float

    def to_csv_line(self) -> str:
        return (
            f"{self.sweep},{self.learner},{self.n},{self.k},{self.m},"
            f"{self.trial},{self.seed},{self.accuracy:.6f},"
            f"{self.dont_know_rate:.6f},{self.runtime_ms:.3f}"
        )


def point_subset(cfg: SweepConfig, value: int) -> tuple[int, ...]:
    """The parity bits taught at one sweep point."""
    if cfg.kind == "m":
        return cfg.subset
    return random_parity_subset(cfg.n, value, cfg.seed)


def _point_mk(cfg: SweepConfig, value: int) -> tuple[int, int]:
    if cfg.kind == "m":
        return value, len(cfg.subset)
    return cfg.fixed_m, value


def run_one_trial(cfg: SweepConfig, value: int, learner: str, trial: int) -> ResultRow:
    m, k = _point_mk(cfg, value)
    subset = point_subset(cfg, value)
    concept = build_parity(cfg.n, subset)
    seed = derive_seed(cfg.seed, learner, value, trial)
    d = Distribution.uniform(cfg.n, seed)

    start = time.perf_counter()
    if learner in IMPACT_MODES:
        report = run_teaching_session(
            concept,
            d,
            m,
            mode=IMPACT_MODES[learner],
            test_size=cfg.test_size,
            diagnostics=False,
        )
        acc = report.test_accuracy
        dk = report.test_dont_know_rate
    else:
        train = draw_sample(d, concept, m, stream="train")
        test = draw_sample(d, concept, cfg.test_size, stream="test")
        model = BASELINE_FITTERS[learner](train)
        acc = accuracy(model, test)
        dk = 0.0
    runtime_ms = (time.perf_counter() - start) * 1000.0

    return ResultRow(
        sweep=cfg.name,
        learner=learner,
        n=cfg.n,
        k=k,
        m=m,
        trial=trial,
        seed=seed,
        accuracy=acc,
        dont_know_rate=dk,
        runtime_ms=runtime_ms,
    )


def _task(args) -> ResultRow:
    cfg_raw, value, learner, trial = args
    return run_one_trial(config_from_dict(cfg_raw), value, learner, trial)


def _config_raw(cfg: SweepConfig) -> dict:
    raw = {
        "name": cfg.name,
        "kind": cfg.kind,
        "n": cfg.n,
        "trials": cfg.trials,
        "seed": cfg.seed,
        "learners": list(cfg.learners),
        "test_size": cfg.test_size,
        "workers": 1,
        "out_dir": cfg.out_dir,
    }
    if cfg.kind == "m":
        raw["m_values"] = list(cfg.values)
        raw["subset"] = list(cfg.subset)
    else:
        raw["k_values"] = list(cfg.values)
        raw["m"] = cfg.fixed_m
    return raw


def _summarize(cfg: SweepConfig, group: list[ResultRow]) -> list[ResultRow]:
    accs = np.array([r.accuracy for r in group])
    dks = np.array([r.dont_know_rate for r in group])
    rts = np.array([r.runtime_ms for r in group])
    base = group[0]
    mean = replace(
        base,
        trial=MEAN_TRIAL,
        seed=cfg.seed,
        accuracy=float(accs.mean()),
        dont_know_rate=float(dks.mean()),
        runtime_ms=float(rts.mean()),
    )
    spread = replace(
        base,
        trial=STDDEV_TRIAL,
        seed=cfg.seed,
        accuracy=float(accs.std()),
        dont_know_rate=float(dks.std()),
        runtime_ms=float(rts.std()),
    )
    return [mean, spread]


def run_sweep(cfg: SweepConfig) -> list[ResultRow]:
    """All trials for all points and learners, plus per-group summary rows
    (trial -1 holds the mean, trial -2 the standard deviation)."""
    tasks = [
        (value, learner, trial)
        for value in cfg.values
        for learner in cfg.learners
        for trial in range(cfg.trials)
    ]
    if cfg.workers > 1:
        raw = _config_raw(cfg)
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            done = list(pool.map(_task, [(raw, *t) for t in tasks]))
    else:
        done = [run_one_trial(cfg, *t) for t in tasks]

    by_task = dict(zip(tasks, done))
    rows: list[ResultRow] = []
    for value in cfg.values:
        for learner in cfg.learners:
            group = [by_task[(value, learner, t)] for t in range(cfg.trials)]
            rows.extend(group)
            rows.extend(_summarize(cfg, group))
    return rows


def rows_to_csv(rows: list[ResultRow]) -> str:
    lines = [CSV_HEADER]
    lines.extend(r.to_csv_line() for r in rows)
    return "\n".join(lines) + "\n"


def manifest_dict(cfg: SweepConfig) -> dict:
    points = []
    for value in cfg.values:
        m, k = _point_mk(cfg, value)
        points.append({"m": m, "k": k, "subset": list(point_subset(cfg, value))})
    return {
        "name": cfg.name,
        "kind": cfg.kind,
        "n": cfg.n,
        "seed": cfg.seed,
        "trials": cfg.trials,
        "test_size": cfg.test_size,
        "learners": list(cfg.learners),
        "points": points,
    }


# ---------------------------------------------------------------------------
# SVG emission
# ---------------------------------------------------------------------------

PALETTE = ("#2563eb", "#dc2626", "#16a34a", "#9333ea", "#ea580c", "#0891b2")

_WIDTH, _HEIGHT = 640, 420
_LEFT, _RIGHT, _TOP, _BOTTOM = 62, 24, 40, 48


def _x_pos(value: float, lo: float, hi: float) -> float:
    span = hi - lo
    frac = 0.5 if span == 0 else (value - lo) / span
    return _LEFT + frac * (_WIDTH - _LEFT - _RIGHT)


def _y_pos(value: float) -> float:
    return _TOP + (1.0 - value) * (_HEIGHT - _TOP - _BOTTOM)


def svg_line_chart(
    series: list[tuple[str, list[float]]], x_values: list[int], x_label: str, title: str
) -> str:
    lo, hi = min(x_values), max(x_values)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" height="{_HEIGHT}" '
        f'viewBox="0 0 {_WIDTH} {_HEIGHT}" font-family="sans-serif">',
        f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
        f'<text x="{_WIDTH / 2:.1f}" y="24" text-anchor="middle" font-size="16">{title}</text>',
    ]
    axis_y = _HEIGHT - _BOTTOM
    parts.append(
        f'<line x1="{_LEFT}" y1="{axis_y}" x2="{_WIDTH - _RIGHT}" y2="{axis_y}" stroke="black"/>'
    )
    parts.append(f'<line x1="{_LEFT}" y1="{_TOP}" x2="{_LEFT}" y2="{axis_y}" stroke="black"/>')
    for tick in (0.0, 0.2, 0.4, 0.6, 0.8, 1.0):
        y = _y_pos(tick)
        parts.append(
            f'<line x1="{_LEFT - 4}" y1="{y:.1f}" x2="{_LEFT}" y2="{y:.1f}" stroke="black"/>'
        )
        parts.append(
            f'<text x="{_LEFT - 8}" y="{y + 4:.1f}" text-anchor="end" font-size="11">{tick:.1f}</text>'
        )
    for value in x_values:
        x = _x_pos(value, lo, hi)
        parts.append(
            f'<line x1="{x:.1f}" y1="{axis_y}" x2="{x:.1f}" y2="{axis_y + 4}" stroke="black"/>'
        )
        parts.append(
            f'<text x="{x:.1f}" y="{axis_y + 18}" text-anchor="middle" font-size="11">{value}</text>'
        )
    parts.append(
        f'<text x="{(_LEFT + _WIDTH - _RIGHT) / 2:.1f}" y="{_HEIGHT - 12}" '
        f'text-anchor="middle" font-size="13">{x_label}</text>'
    )
    parts.append(
        f'<text x="16" y="{(_TOP + axis_y) / 2:.1f}" text-anchor="middle" font-size="13" '
        f'transform="rotate(-90 16 {(_TOP + axis_y) / 2:.1f})">mean accuracy</text>'
    )
    for idx, (name, ys) in enumerate(series):
        color = PALETTE[idx % len(PALETTE)]
        coords = " ".join(
            f"{_x_pos(x, lo, hi):.1f},{_y_pos(y):.1f}" for x, y in zip(x_values, ys)
        )
        parts.append(
            f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="2"/>'
        )
        for x, y in zip(x_values, ys):
            parts.append(
                f'<circle cx="{_x_pos(x, lo, hi):.1f}" cy="{_y_pos(y):.1f}" r="3" fill="{color}"/>'
            )
        ly = _TOP + 8 + idx * 16
        lx = _WIDTH - _RIGHT - 150
        parts.append(
            f'<line x1="{lx}" y1="{ly}" x2="{lx + 22}" y2="{ly}" stroke="{color}" stroke-width="2"/>'
        )
        parts.append(f'<text x="{lx + 28}" y="{ly + 4}" font-size="12">{name}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def plot_from_rows(cfg: SweepConfig, rows: list[ResultRow]) -> str | None:
    """Mean-accuracy chart for a finished sweep; None (with a warning) when
    there is nothing to plot."""
    if not rows:
        warnings.warn("no rows to plot, skipping SVG emission", stacklevel=2)
        return None
    means = {
        (r.learner, r.m if cfg.kind == "m" else r.k): r.accuracy
        for r in rows
        if r.trial == MEAN_TRIAL
    }
    x_values = list(cfg.values)
    series = [
        (learner, [means[(learner, v)] for v in x_values]) for learner in cfg.learners
    ]
    x_label = "training examples" if cfg.kind == "m" else "parity size"
    return svg_line_chart(series, x_values, x_label, cfg.name)


def write_outputs(cfg: SweepConfig, rows: list[ResultRow], out_dir=None) -> dict[str, Path]:
    target = Path(out_dir if out_dir is not None else cfg.out_dir)
    target.mkdir(parents=True, exist_ok=True)
    paths = {}
    csv_path = target / "results.csv"
    csv_path.write_text(rows_to_csv(rows))
    paths["csv"] = csv_path
    manifest_path = target / "manifest.json"
    manifest_path.write_text(json.dumps(manifest_dict(cfg), indent=2, sort_keys=True) + "\n")
    paths["manifest"] = manifest_path
    svg = plot_from_rows(cfg, rows)
    if svg is not None:
        svg_path = target / "accuracy.svg"
        svg_path.write_text(svg)
        paths["svg"] = svg_path
    return paths
