"""Command-line campaign harness: multi-seed runs, trace and summary CSVs.

Outputs per campaign directory:

* ``trace_seed<NNN>.csv`` -- one row per BO iteration with the selected
  input, observed outputs, and the hypervolume after the update. These files
  contain only deterministic values, so a rerun with the same spec is
  byte-identical.
* ``timing_seed<NNN>.csv`` -- wall-clock seconds per iteration (kept apart
  from the traces precisely because timing is not reproducible).
* ``summary.csv`` -- per-iteration median and interquartile band of the
  hypervolume across seeds, plus the mean wall seconds.
* ``campaign_meta.txt`` -- the fully resolved configuration, package
  version, and a timestamp.
* ``errors.txt`` -- present only if some seeds failed.

Exit codes: 0 success, 1 usage error, 2 when every seed failed.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import csv
import sys
import time
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import __version__
from .benchmarks import PROBLEM_NAMES, make_problem
from .engine import METHODS, RunConfig, RunRecord, run_bo

__all__ = ["CampaignSpec", "UsageError", "parse_args", "run_campaign", "main"]

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_ALL_FAILED = 2


class UsageError(ValueError):
    """Malformed command line or config file."""


@dataclass(frozen=True)
class CampaignSpec:
    """A RunConfig template plus the multi-seed execution plan."""

    base: RunConfig
    seeds: tuple[int, ...]
    out_dir: Path
    jobs: int = 1

    def config_for(self, seed: int) -> RunConfig:
        return RunConfig(
            **{**{f.name: getattr(self.base, f.name) for f in fields(RunConfig)}, "seed": seed}
        )


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="molbo",
        description="Run a multi-seed multi-objective BO campaign and write trace/summary CSVs.",
    )
    parser.add_argument("--problem", choices=PROBLEM_NAMES, help="benchmark problem name")
    parser.add_argument("--method", choices=METHODS, help="acquisition method")
    parser.add_argument("--horizon", type=int, help="lookahead horizon cap (default 4)")
    parser.add_argument("--iterations", type=int, help="BO iterations per run (default 65)")
    parser.add_argument("--init-points", type=int, help="Sobol initial design size (default 5)")
    parser.add_argument("--seeds", type=int, help="number of seeded runs (default 15)")
    parser.add_argument("--mc-samples", type=int, help="Monte Carlo samples per acquisition (default 128)")
    parser.add_argument("--grid-size", type=int, help="grid size for the nested method (default 512)")
    parser.add_argument("--out", type=str, help="output directory (default campaign_out)")
    parser.add_argument("--jobs", type=int, help="parallel seed workers (default 1)")
    parser.add_argument("--config", type=str, help="key=value config file; flags override it")
    return parser


_DEFAULTS = {
    "horizon": 4,
    "iterations": 65,
    "init_points": 5,
    "seeds": 15,
    "mc_samples": 128,
    "grid_size": 512,
    "out": "campaign_out",
    "jobs": 1,
}

_INT_KEYS = {"horizon", "iterations", "init_points", "seeds", "mc_samples", "grid_size", "jobs"}


def _read_config_file(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path!r}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        values[key.replace("-", "_")] = value
    return values


def parse_args(argv) -> CampaignSpec:
    """Resolve a campaign spec from flags and an optional config file."""
    parser = _build_parser()
    try:
        namespace = parser.parse_args(argv)
    except SystemExit as exc:
        if exc.code in (0, None):
            raise
        raise UsageError("invalid command line") from None

    merged: dict[str, object] = dict(_DEFAULTS)
    if namespace.config:
        for key, value in _read_config_file(namespace.config).items():
            if key in _INT_KEYS:
                try:
                    merged[key] = int(value)
                except ValueError:
                    raise UsageError(f"config key {key}={value!r} is not an integer") from None
            elif key in ("problem", "method", "out"):
                merged[key] = value
            else:
                raise UsageError(f"unknown config key {key!r}")
    for key in ("problem", "method", "horizon", "iterations", "init_points",
                "seeds", "mc_samples", "grid_size", "out", "jobs"):
        flag = getattr(namespace, key, None)
        if flag is not None:
            merged[key] = flag

    problem = merged.get("problem")
    method = merged.get("method")
    if not problem or not method:
        raise UsageError("--problem and --method are required")
    if problem not in PROBLEM_NAMES:
        raise UsageError(f"unknown problem {problem!r}; supported: {', '.join(PROBLEM_NAMES)}")
    if method not in METHODS:
        raise UsageError(f"unknown method {method!r}; supported: {', '.join(METHODS)}")
    if int(merged["seeds"]) < 1:
        raise UsageError("--seeds must be >= 1")
    if int(merged["jobs"]) < 1:
        raise UsageError("--jobs must be >= 1")

    try:
        base = RunConfig(
            problem=str(problem),
            method=str(method),
            horizon=int(merged["horizon"]),
            iterations=int(merged["iterations"]),
            init_points=int(merged["init_points"]),
            mc_samples=int(merged["mc_samples"]),
            grid_size=int(merged["grid_size"]),
            seed=0,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc

    return CampaignSpec(
        base=base,
        seeds=tuple(range(int(merged["seeds"]))),
        out_dir=Path(str(merged["out"])),
        jobs=int(merged["jobs"]),
    )


def _trace_path(out_dir: Path, seed: int) -> Path:
    return out_dir / f"trace_seed{seed:03d}.csv"


def _timing_path(out_dir: Path, seed: int) -> Path:
    return out_dir / f"timing_seed{seed:03d}.csv"


def _write_trace(path: Path, record: RunRecord, seed: int) -> None:
    d = record.pareto_inputs.shape[1] if record.pareto_inputs.size else len(record.rows[0].x)
    k = len(record.rows[0].y)
    header = ["seed", "iteration", "hypervolume"]
    header += [f"x{i}" for i in range(d)] + [f"y{j}" for j in range(k)]
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in record.rows:
            writer.writerow([seed, row.iteration, repr(row.hypervolume)]
                            + [repr(v) for v in row.x] + [repr(v) for v in row.y])


def _write_timing(path: Path, record: RunRecord, seed: int) -> None:
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["seed", "iteration", "wall_seconds"])
        for row in record.rows:
            writer.writerow([seed, row.iteration, repr(row.wall_seconds)])


def _run_one_seed(spec: CampaignSpec, seed: int) -> tuple[int, str | None]:
    """Worker: run one seed and write its trace and timing files."""
    try:
        record = run_bo(spec.config_for(seed))
        _write_trace(_trace_path(spec.out_dir, seed), record, seed)
        _write_timing(_timing_path(spec.out_dir, seed), record, seed)
        return seed, None
    except Exception as exc:  # recorded, not raised: one seed must not kill a campaign
        return seed, f"{type(exc).__name__}: {exc}"


def read_traces(out_dir: Path, seeds) -> dict[int, np.ndarray]:
    """Hypervolume columns of the per-seed traces, keyed by seed."""
    traces = {}
    for seed in seeds:
        path = _trace_path(Path(out_dir), seed)
        if not path.exists():
            continue
        rows = list(csv.DictReader(path.open()))
        traces[seed] = np.array([float(r["hypervolume"]) for r in rows])
    return traces


def read_timings(out_dir: Path, seeds) -> dict[int, np.ndarray]:
    """Wall-seconds columns of the per-seed timing files, keyed by seed."""
    timings = {}
    for seed in seeds:
        path = _timing_path(Path(out_dir), seed)
        if not path.exists():
            continue
        rows = list(csv.DictReader(path.open()))
        timings[seed] = np.array([float(r["wall_seconds"]) for r in rows])
    return timings


def write_summary(out_dir: Path, seeds) -> Path:
    """Aggregate traces into the per-iteration summary; idempotent."""
    out_dir = Path(out_dir)
    traces = read_traces(out_dir, seeds)
    timings = read_timings(out_dir, seeds)
    if not traces:
        raise RuntimeError("no traces to summarize")
    hv = np.vstack([traces[s] for s in sorted(traces)])
    wall = np.vstack([timings[s] for s in sorted(timings)]) if timings else np.zeros_like(hv)
    path = out_dir / "summary.csv"
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", "hv_median", "hv_q25", "hv_q75", "wall_mean"])
        for i in range(hv.shape[1]):
            writer.writerow([
                i + 1,
                repr(float(np.median(hv[:, i]))),
                repr(float(np.quantile(hv[:, i], 0.25))),
                repr(float(np.quantile(hv[:, i], 0.75))),
                repr(float(np.mean(wall[:, i]))),
            ])
    return path


def _write_metadata(spec: CampaignSpec) -> None:
    lines = [f"version={__version__}", f"timestamp={time.strftime('%Y-%m-%dT%H:%M:%S%z')}"]
    for f in fields(RunConfig):
        lines.append(f"{f.name}={getattr(spec.base, f.name)}")
    lines.append(f"seeds={','.join(str(s) for s in spec.seeds)}")
    lines.append(f"jobs={spec.jobs}")
    (spec.out_dir / "campaign_meta.txt").write_text("\n".join(lines) + "\n")


def run_campaign(spec: CampaignSpec) -> int:
    """Execute every seed, then write the summary. Returns an exit code."""
    make_problem(spec.base.problem)  # fail fast on an unknown problem
    spec.out_dir.mkdir(parents=True, exist_ok=True)
    _write_metadata(spec)

    failures: list[tuple[int, str]] = []
    if spec.jobs == 1:
        results = [_run_one_seed(spec, seed) for seed in spec.seeds]
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=spec.jobs) as pool:
            results = list(pool.map(_run_one_seed, [spec] * len(spec.seeds), spec.seeds))
    for seed, error in results:
        if error is not None:
            failures.append((seed, error))

    if failures:
        with (spec.out_dir / "errors.txt").open("w") as fh:
            for seed, error in failures:
                fh.write(f"seed={seed}: {error}\n")
    if len(failures) == len(spec.seeds):
        return EXIT_ALL_FAILED
    write_summary(spec.out_dir, spec.seeds)
    return EXIT_OK


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        spec = parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return run_campaign(spec)


if __name__ == "__main__":
    sys.exit(main())
