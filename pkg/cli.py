"""
Command-line front end.

    python main.py det --n 1 --ell 1
    python main.py sweep --command det --n 256:4096:x2 --ell 1 --fit --format json --out det.json
    python main.py theta --ell 1:64:x2

``--n`` and ``--ell`` accept a single integer, ``a:b:x2`` (geometric doubling)
or ``a:b:+k`` (arithmetic). A JSON output file is itself a valid ``--config``:
its ``meta`` object is the run configuration.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from typing import Dict, List, Literal, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

import asym
import ensemble
import hilbert
import mc
from errors import DegenerateAbscissae, DomainError, OrthoPersistError, UsageError
from workers import map_streams

logger = logging.getLogger("orthopersist.cli")

Command = Literal["det", "mgf", "dist", "allreal", "theta", "hilbert", "mc", "walk", "kac", "sweep"]
PointCommand = Literal["det", "mgf", "dist", "allreal", "theta", "hilbert", "mc", "walk", "kac"]

HEADERS: Dict[str, Tuple[str, ...]] = {
    "det": ("n", "ell", "p_no_real"),
    "mgf": ("n", "ell", "s", "mgf"),
    "dist": ("n", "ell", "k", "prob", "stderr"),
    "allreal": ("n", "ell", "log_p_all_real"),
    "theta": ("ell", "theta"),
    "hilbert": ("x", "l", "hatP"),
    "mc": ("n", "ell", "estimate", "stderr", "samples", "seed"),
    "walk": ("ell", "estimate", "stderr", "samples", "seed"),
    "kac": ("n", "estimate", "stderr", "samples", "seed"),
}
KEY_COLUMNS = {"det": 2, "mgf": 2, "dist": 3, "allreal": 2, "theta": 1, "hilbert": 2, "mc": 2, "walk": 1, "kac": 1}
# (abscissa, ordinate) used by --fit
FIT_COLUMNS = {
    "det": ("n", "p_no_real"),
    "mgf": ("n", "mgf"),
    "allreal": ("n", "log_p_all_real"),
    "theta": ("ell", "theta"),
    "mc": ("n", "estimate"),
    "walk": ("ell", "estimate"),
    "kac": ("n", "estimate"),
}
FIT_HEADER = ("slope", "intercept", "residual")
PHI_HEADER = ("alpha", "phi")
DEFAULT_SAMPLES = {"mc": 100_000, "walk": 1_000_000, "kac": 100_000}

Row = Tuple[float, ...]


# ── Pydantic models ────────────────────────────────────────────────────────
class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    command: Command
    n: Optional[str] = Field(None, description="n, degree N or l; integer or range")
    ell: str = Field("1", description="truncation rank; integer or range")
    s: Optional[float] = None
    alpha: Optional[float] = None
    x: Optional[float] = None
    samples: Optional[int] = Field(None, ge=1)
    seed: int = Field(0, ge=0, lt=2 ** 64)
    out: Optional[str] = None
    format: Literal["csv", "json"] = "csv"
    fit: bool = False
    sweep_command: Optional[PointCommand] = None
    roots: bool = False
    bandwidth: float = Field(0.05, gt=0)
    max_steps: int = Field(10_000, ge=1)

    @field_validator("n", "ell", mode="before")
    @classmethod
    def _range_as_text(cls, v):
        return str(v) if isinstance(v, int) else v


# ── Ranges and fitting ────────────────────────────────────────────────────
def parse_range(text: str) -> List[int]:
    """``7`` → [7]; ``a:b:x2`` → a, 2a, 4a, … ≤ b; ``a:b:+k`` → a, a+k, … ≤ b."""
    parts = text.strip().split(":")
    try:
        if len(parts) == 1:
            values = [int(parts[0])]
        elif len(parts) in (2, 3):
            a, b = int(parts[0]), int(parts[1])
            step = parts[2] if len(parts) == 3 else "+1"
            values = []
            if step.startswith("x"):
                factor = int(step[1:])
                if factor < 2 or a < 1:
                    raise DomainError(f"geometric range {text!r} needs a >= 1 and factor >= 2")
                v = a
                while v <= b:
                    values.append(v)
                    v *= factor
            elif step.startswith("+"):
                inc = int(step[1:])
                if inc < 1:
                    raise DomainError(f"arithmetic range {text!r} needs a positive step")
                values = list(range(a, b + 1, inc))
            else:
                raise DomainError(f"range step must be xK or +K, got {step!r}")
        else:
            raise DomainError(f"malformed range {text!r}")
    except ValueError as e:
        raise DomainError(f"malformed range {text!r}") from e
    if not values:
        raise DomainError(f"range {text!r} is empty")
    return values


def fit_slope(points: Sequence[Tuple[float, float]]) -> Tuple[float, float, float]:
    """Ordinary least squares y = slope·x + intercept; residual is the RMS error."""
    if len(points) < 3:
        raise DegenerateAbscissae(f"need at least 3 points to fit, got {len(points)}")
    xs = np.array([p[0] for p in points], dtype=float)
    ys = np.array([p[1] for p in points], dtype=float)
    if len(np.unique(xs)) != len(xs):
        raise DegenerateAbscissae("fit abscissae must be distinct")
    A = np.column_stack([xs, np.ones_like(xs)])
    (slope, intercept), *_ = np.linalg.lstsq(A, ys, rcond=None)
    residual = math.sqrt(float(np.mean((A @ np.array([slope, intercept]) - ys) ** 2)))
    return float(slope), float(intercept), residual


# ── Grid points ───────────────────────────────────────────────────────────
def _require(value, flag: str, command: str):
    if value is None:
        raise UsageError(f"{command} requires {flag}")
    return value


def _point_rows(task: Tuple[dict, str, int, int, Optional[int]]) -> List[Row]:
    """Rows of one grid point; top-level so sweeps can ship it to a worker process."""
    config_dict, command, n, ell, workers = task
    config = RunConfig(**config_dict)
    if command == "theta":
        report = asym.theta() if ell == 1 else asym.theta_ell(ell)
        return [(ell, report.value)]
    if command == "hilbert":
        x = _require(config.x, "--x", command)
        return [(x, n, hilbert.hatP_eval(n, x))]
    if command == "walk":
        samples = config.samples or DEFAULT_SAMPLES["walk"]
        try:
            walk = mc.WalkConfig(ell=ell, samples=samples, bandwidth=config.bandwidth, max_steps=config.max_steps)
        except ValidationError as e:
            raise DomainError(f"invalid walk configuration: {e.errors()[0]['msg']}") from e
        est = mc.walk_theta(walk, config.seed, workers)
        return [(ell, est.mean, est.stderr, est.samples, est.seed)]
    if command == "kac":
        samples = config.samples or DEFAULT_SAMPLES["kac"]
        if config.roots:
            est = mc.estimate_kac_mean_roots(n, samples, config.seed, workers)
        else:
            est = mc.estimate_kac_persistence(n, samples, config.seed, workers)
        return [(n, est.mean, est.stderr, est.samples, est.seed)]

    params = ensemble.make_params(n, ell)
    if command == "det":
        return [(n, ell, ensemble.p_no_real(params))]
    if command == "mgf":
        s = _require(config.s, "--s", command)
        return [(n, ell, s, ensemble.mgf(params, s))]
    if command == "allreal":
        return [(n, ell, ensemble.log_p_all_real(params))]
    if command == "mc":
        est = mc.estimate_p_no_real(params, config.samples or DEFAULT_SAMPLES["mc"], config.seed, workers)
        return [(n, ell, est.mean, est.stderr, est.samples, est.seed)]
    if command == "dist":
        if config.samples is None:
            probs = ensemble.real_count_distribution(params).probs
            return [(n, ell, k, p, 0.0) for k, p in enumerate(probs)]
        estimates = mc.estimate_distribution(params, config.samples, config.seed, workers)
        return [(n, ell, k, e.mean, e.stderr) for k, e in enumerate(estimates)]
    raise UsageError(f"unknown command {command!r}")


def _grid(config: RunConfig, command: str) -> List[Tuple[int, int]]:
    if command in ("theta", "walk"):
        return [(0, ell) for ell in parse_range(config.ell)]
    ns = parse_range(_require(config.n, "--n", command))
    if command in ("hilbert", "kac"):
        return [(n, 1) for n in ns]
    return [(n, ell) for n in ns for ell in parse_range(config.ell)]


def compute(config: RunConfig) -> Tuple[str, List[Row], Dict[str, Row]]:
    """Evaluate every grid point; returns (point command, sorted rows, extra blocks)."""
    if config.command == "sweep":
        command = _require(config.sweep_command, "--command", "sweep")
    else:
        command = config.command
    grid = _grid(config, command)
    payload = config.model_dump()
    logger.info(f"Running {command} over {len(grid)} grid point(s)")
    if config.command == "sweep":
        # points in parallel, each point serial inside its worker
        tasks = [(payload, command, n, ell, 1) for n, ell in grid]
        chunks = map_streams(_point_rows, tasks)
    else:
        chunks = [_point_rows((payload, command, n, ell, None)) for n, ell in grid]
    rows = sorted((row for chunk in chunks for row in chunk), key=lambda r: r[: KEY_COLUMNS[command]])

    extra: Dict[str, Row] = {}
    if command == "allreal" and config.alpha is not None:
        extra["phi"] = (config.alpha, asym.phi(config.alpha))
    if config.fit:
        extra["fit"] = _fit_rows(command, rows)
    return command, rows, extra


def _fit_rows(command: str, rows: List[Row]) -> Row:
    if command not in FIT_COLUMNS:
        raise DomainError(f"--fit is not available for {command}")
    header = HEADERS[command]
    x_name, y_name = FIT_COLUMNS[command]
    xi, yi = header.index(x_name), header.index(y_name)
    if "ell" in header and x_name != "ell" and len({r[header.index("ell")] for r in rows}) > 1:
        raise DomainError("--fit needs a single ell")
    points = []
    for r in rows:
        x, y = float(r[xi]), float(r[yi])
        if not y_name.startswith("log_"):
            if y <= 0:
                raise DomainError(f"cannot fit ln {y_name} with non-positive value {y!r}")
            y = math.log(y)
        points.append((math.log(x), y))
    slope, intercept, residual = fit_slope(points)
    logger.info(f"Fitted slope {slope:.6g} (intercept {intercept:.6g}, residual {residual:.2g})")
    return slope, intercept, residual


# ── Output ────────────────────────────────────────────────────────────────
def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.17g}"


def render_csv(command: str, rows: List[Row], extra: Dict[str, Row]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(HEADERS[command])
    writer.writerows([_cell(v) for v in r] for r in rows)
    for name, header in (("phi", PHI_HEADER), ("fit", FIT_HEADER)):
        if name in extra:
            buf.write("\n")
            writer.writerow(header)
            writer.writerow([_cell(v) for v in extra[name]])
    return buf.getvalue()


def _json_value(v):
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return int(v)
    return float(v)


def render_json(config: RunConfig, command: str, rows: List[Row], extra: Dict[str, Row]) -> str:
    doc = {
        "meta": config.model_dump(),
        "rows": [dict(zip(HEADERS[command], map(_json_value, r))) for r in rows],
    }
    if "phi" in extra:
        doc["phi"] = dict(zip(PHI_HEADER, map(float, extra["phi"])))
    if "fit" in extra:
        doc["fit"] = dict(zip(FIT_HEADER, map(float, extra["fit"])))
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def run(config: RunConfig) -> int:
    """Execute a configured run and write its output; returns the process exit code."""
    try:
        command, rows, extra = compute(config)
        text = render_csv(command, rows, extra) if config.format == "csv" else render_json(config, command, rows, extra)
        if config.out:
            with open(config.out, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
            logger.info(f"Wrote {len(rows)} row(s) to {config.out}")
        else:
            sys.stdout.write(text)
    except OrthoPersistError as e:
        logger.error(f"{type(e).__name__}: {e.detail}")
        return e.exit_code
    except OSError as e:
        logger.error(f"cannot write output: {e}")
        return UsageError.exit_code
    return 0


# ── Argument parsing ──────────────────────────────────────────────────────
class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="orthopersist", description="Persistence of truncated Haar orthogonal matrices")
    p.add_argument("command", nargs="?", choices=list(HEADERS) + ["sweep"])
    p.add_argument("--n", help="n (or degree N, or l for hilbert): integer, a:b:x2 or a:b:+k")
    p.add_argument("--ell", help="truncation rank: integer or range")
    p.add_argument("--s", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--x", type=float, help="abscissa for hilbert")
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.add_argument("--format", choices=["csv", "json"])
    p.add_argument("--fit", action="store_true", default=None)
    p.add_argument("--command", dest="sweep_command", choices=list(HEADERS))
    p.add_argument("--roots", action="store_true", default=None, help="kac: mean real-root count")
    p.add_argument("--bandwidth", type=float, help="walk: kernel bandwidth")
    p.add_argument("--max-steps", dest="max_steps", type=int, help="walk: step cap per walker")
    p.add_argument("--config", help="JSON run configuration (a previous JSON output works)")
    return p


def load_config_file(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        raise UsageError(f"cannot read config {path}: {e}") from e
    if not isinstance(doc, dict):
        raise UsageError(f"config {path} must hold a JSON object")
    return doc.get("meta", doc)


def parse_config(argv: Optional[Sequence[str]] = None) -> RunConfig:
    """Config file first, then flags; flags win."""
    args = vars(build_parser().parse_args(argv))
    path = args.pop("config")
    merged = load_config_file(path) if path else {}
    merged.update({k: v for k, v in args.items() if v is not None})
    try:
        return RunConfig(**merged)
    except ValidationError as e:
        raise UsageError(f"invalid configuration: {e}") from e


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        config = parse_config(argv)
    except UsageError as e:
        logger.error(f"usage: {e.detail}")
        return e.exit_code
    return run(config)
