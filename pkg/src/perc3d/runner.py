"""Seeded, resumable experiment orchestration, persistence and reporting.

Trials draw every bit of randomness from their own seed, so scheduling
order and worker count can never change the outcome.  Records append to
a plain text file, one trial per line, and a trailing #SUMMARY line is
the atomic finalization marker.  Rerunning after a crash skips seeds
already on disk.  A seed-ledger file in the output directory refuses to
reuse a finalized seed range for a different experiment, which keeps
exploratory runs from contaminating the seeds of a final run.
"""

import hashlib
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Dict, Optional, Sequence, Tuple, Union

from .errors import (
    ConfigError,
    ContractError,
    IncompleteRunError,
    RecordFormatError,
    SeedLedgerError,
    TamperError,
)
from .events import lower_event, upper_event
from .lattice import (
    GENERATOR_ID,
    make_block_geometry,
    make_rect_geometry,
    sample_block,
    sample_rect,
)
from .stats import (
    CONSTANTS,
    Verdict,
    as_rational,
    decimal_str,
    format_probability,
    plan,
    verdict,
)

MODES = ("lower", "upper")
KINDS = ("bond", "site")

# Stable field order for config files, record headers and digests.
CONFIG_KEYS = ("mode", "kind", "scale", "p", "trials", "base_seed",
               "alpha", "output", "generator")
# The block scale may be written as L (lower mode) or s (upper mode).
_SCALE_ALIASES = {"L": "scale", "s": "scale"}
# Everything but the output path identifies the experiment. Moving or
# renaming the record file must not change what the records mean.
_DIGEST_KEYS = ("mode", "kind", "scale", "p", "trials", "base_seed",
                "alpha", "generator")

RECORDS_HEADER = "#RECORDS perc3d v1"
SUMMARY_PREFIX = "#SUMMARY"
LEDGER_NAME = "seed_ledger.txt"


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to rerun an experiment bit for bit."""

    mode: str
    kind: str
    scale: int
    p: Fraction
    trials: int
    base_seed: int
    alpha: Fraction
    output: str
    generator: str = GENERATOR_ID

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.kind not in KINDS:
            raise ConfigError(f"kind must be one of {KINDS}, got {self.kind!r}")
        for name in ("scale", "trials", "base_seed"):
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool):
                raise ConfigError(f"{name} must be an integer, got {v!r}")
        if self.scale < 1:
            raise ConfigError(f"scale must be positive, got {self.scale}")
        if self.trials < 1:
            raise ConfigError(f"trials must be positive, got {self.trials}")
        if self.base_seed < 0:
            raise ConfigError(f"base_seed must be >= 0, got {self.base_seed}")
        if not isinstance(self.p, Fraction) or not (0 <= self.p <= 1):
            raise ConfigError(f"p must be a Fraction in [0, 1], got {self.p!r}")
        if not isinstance(self.alpha, Fraction) or not (0 < self.alpha < 1):
            raise ConfigError(f"alpha must be a Fraction in (0, 1), got {self.alpha!r}")
        if not self.output:
            raise ConfigError("output path must be non-empty")
        if self.generator != GENERATOR_ID:
            raise ConfigError(
                f"unsupported generator {self.generator!r}; this build "
                f"provides {GENERATOR_ID!r}"
            )

    @property
    def seeds(self) -> range:
        return range(self.base_seed, self.base_seed + self.trials)

    @property
    def digest(self) -> str:
        text = "\n".join(f"{k}={_format_value(k, getattr(self, k))}"
                         for k in _DIGEST_KEYS)
        return hashlib.sha256(text.encode()).hexdigest()[:12]


def _format_value(key: str, value) -> str:
    if key in ("p", "alpha"):
        return f"{value.numerator}/{value.denominator}"
    return str(value)


def format_config(cfg: ExperimentConfig) -> str:
    """Canonical key=value rendering, one field per line, fixed order."""
    return "\n".join(f"{k}={_format_value(k, getattr(cfg, k))}"
                     for k in CONFIG_KEYS) + "\n"


def parse_config(text: str, defaults: Optional[Dict[str, str]] = None) -> ExperimentConfig:
    """Parse flat key=value config text.

    Unknown keys are hard errors so a typo like "trails=800" cannot
    silently fall back to a default.
    """
    raw: Dict[str, str] = dict(defaults or {})
    seen = set()
    for ln_no, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {ln_no}: expected key=value, got {line!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        value = value.strip()
        key = _SCALE_ALIASES.get(key, key)
        if key not in CONFIG_KEYS:
            raise ConfigError(f"line {ln_no}: unknown config key {key!r}")
        if key in seen:
            raise ConfigError(f"line {ln_no}: duplicate config key {key!r}")
        seen.add(key)
        raw[key] = value
    missing = [k for k in CONFIG_KEYS
               if k not in raw and k != "generator"]
    if missing:
        raise ConfigError(f"missing config keys: {', '.join(missing)}")
    try:
        return ExperimentConfig(
            mode=raw["mode"],
            kind=raw["kind"],
            scale=int(raw["scale"]),
            p=as_rational(raw["p"]),
            trials=int(raw["trials"]),
            base_seed=int(raw["base_seed"]),
            alpha=as_rational(raw["alpha"]),
            output=raw["output"],
            generator=raw.get("generator", GENERATOR_ID),
        )
    except ValueError as exc:
        raise ConfigError(f"bad config value: {exc}") from exc


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    return parse_config(Path(path).read_text())


@dataclass(frozen=True)
class TrialRecord:
    seed: int
    event: bool
    ms: int
    digest: str
    witness: str = ""

    def line(self) -> str:
        parts = [f"seed={self.seed}", f"event={int(self.event)}",
                 f"ms={self.ms}", f"digest={self.digest}"]
        if self.witness:
            parts.append(f"witness={self.witness}")
        return " ".join(parts)

    def stable_fields(self) -> tuple:
        """Everything except runtime, for schedule-independence checks."""
        return (self.seed, self.event, self.digest, self.witness)


def parse_record(line: str) -> TrialRecord:
    fields: Dict[str, str] = {}
    for token in line.split():
        if "=" not in token:
            raise RecordFormatError(f"malformed record token {token!r}")
        key, value = token.split("=", 1)
        if key in fields:
            raise RecordFormatError(f"duplicate record field {key!r}")
        fields[key] = value
    try:
        return TrialRecord(
            seed=int(fields["seed"]),
            event=bool(int(fields["event"])),
            ms=int(fields["ms"]),
            digest=fields["digest"],
            witness=fields.get("witness", ""),
        )
    except (KeyError, ValueError) as exc:
        raise RecordFormatError(f"malformed record line {line!r}") from exc


@dataclass(frozen=True)
class RecordFile:
    """Parsed contents of a record file, finalized or not."""

    config: ExperimentConfig
    records: Tuple[TrialRecord, ...]
    finalized: bool
    summary_successes: Optional[int] = None
    summary_trials: Optional[int] = None

    @property
    def successes(self) -> int:
        return sum(1 for r in self.records if r.event)

    def bad_seeds(self) -> Tuple[int, ...]:
        """Seeds whose outcome opposes the bound being certified."""
        if self.config.mode == "lower":
            return tuple(r.seed for r in self.records if r.event)
        return tuple(r.seed for r in self.records if not r.event)


def read_records(path: Union[str, Path]) -> RecordFile:
    path = Path(path)
    lines = path.read_text().splitlines()
    if not lines or lines[0].strip() != RECORDS_HEADER:
        raise RecordFormatError(f"{path}: not a record file (missing header)")
    config_lines = []
    records = []
    finalized = False
    summary_fields: Dict[str, str] = {}
    for line in lines[1:]:
        line = line.strip()
        if not line:
            continue
        if line.startswith("#CONFIG "):
            config_lines.append(line[len("#CONFIG "):])
        elif line.startswith(SUMMARY_PREFIX):
            if finalized:
                raise RecordFormatError(f"{path}: duplicate summary line")
            finalized = True
            for token in line[len(SUMMARY_PREFIX):].split():
                key, _, value = token.partition("=")
                summary_fields[key] = value
        elif line.startswith("#"):
            continue
        else:
            if finalized:
                raise TamperError(f"{path}: record after the summary marker")
            records.append(parse_record(line))
    cfg = parse_config("\n".join(config_lines))
    seen = set()
    for r in records:
        if r.seed in seen:
            raise TamperError(f"{path}: duplicate record for seed {r.seed}")
        seen.add(r.seed)
        if r.digest != cfg.digest:
            raise TamperError(
                f"{path}: record for seed {r.seed} carries digest "
                f"{r.digest}, config digest is {cfg.digest}"
            )
    summary_successes = summary_trials = None
    if finalized:
        try:
            summary_trials = int(summary_fields["trials"])
            summary_successes = int(summary_fields["successes"])
            summary_digest = summary_fields["digest"]
        except (KeyError, ValueError) as exc:
            raise RecordFormatError(f"{path}: malformed summary line") from exc
        if summary_digest != cfg.digest:
            raise TamperError(f"{path}: summary digest does not match config")
    return RecordFile(config=cfg, records=tuple(records), finalized=finalized,
                      summary_successes=summary_successes,
                      summary_trials=summary_trials)


def _check_complete(rf: RecordFile, path) -> None:
    cfg = rf.config
    if not rf.finalized:
        raise IncompleteRunError(f"{path}: no finalization marker; rerun to completion")
    if len(rf.records) != cfg.trials or rf.summary_trials != cfg.trials:
        raise TamperError(
            f"{path}: {len(rf.records)} records for {cfg.trials} configured trials"
        )
    if rf.summary_successes != rf.successes:
        raise TamperError(
            f"{path}: summary claims {rf.summary_successes} successes, "
            f"records contain {rf.successes}"
        )
    expected = set(cfg.seeds)
    got = {r.seed for r in rf.records}
    if got != expected:
        raise TamperError(f"{path}: record seeds do not match the configured range")


def ledger_path_for(cfg: ExperimentConfig) -> Path:
    return Path(cfg.output).parent / LEDGER_NAME


def check_seed_ledger(cfg: ExperimentConfig,
                      ledger: Optional[Union[str, Path]] = None) -> None:
    """Refuse to run over a finalized range belonging to another experiment.

    Reproducing the exact same experiment (same digest) is idempotent and
    always allowed; only a different experiment on overlapping seeds is
    an error.
    """
    path = Path(ledger) if ledger is not None else ledger_path_for(cfg)
    if not path.exists():
        return
    lo, hi = cfg.base_seed, cfg.base_seed + cfg.trials - 1
    for line in path.read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            start_s, end_s, digest = line.split()[:3]
            start, end = int(start_s), int(end_s)
        except ValueError as exc:
            raise SeedLedgerError(f"{path}: malformed ledger line {line!r}") from exc
        if start <= hi and lo <= end and digest != cfg.digest:
            raise SeedLedgerError(
                f"seeds {lo}..{hi} overlap a finalized run ({start}..{end}, "
                f"digest {digest}) of a different experiment; pick a fresh "
                f"seed range"
            )


def record_in_ledger(cfg: ExperimentConfig,
                     ledger: Optional[Union[str, Path]] = None) -> None:
    path = Path(ledger) if ledger is not None else ledger_path_for(cfg)
    lo, hi = cfg.base_seed, cfg.base_seed + cfg.trials - 1
    entry = f"{lo} {hi} {cfg.digest} {cfg.mode} {cfg.kind}"
    if path.exists():
        for line in path.read_text().splitlines():
            if line.strip().startswith(f"{lo} {hi} {cfg.digest}"):
                return
    with open(path, "a") as fh:
        fh.write(entry + "\n")


def run_trial(cfg: ExperimentConfig, seed: int) -> TrialRecord:
    """One fully self-contained trial; all randomness comes from the seed."""
    t0 = time.perf_counter()
    if cfg.mode == "lower":
        g = make_block_geometry(cfg.scale, cfg.kind)
        result = lower_event(sample_block(g, cfg.p, seed), g)
    else:
        r = make_rect_geometry(cfg.scale, cfg.kind)
        result = upper_event(sample_rect(r, cfg.p, seed), r)
    ms = int(round((time.perf_counter() - t0) * 1000))
    witness = result.witness.summary() if result.witness is not None else ""
    return TrialRecord(seed=seed, event=result.holds, ms=ms,
                       digest=cfg.digest, witness=witness)


def _worker(args) -> TrialRecord:
    cfg, seed = args
    return run_trial(cfg, seed)


@dataclass(frozen=True)
class RunResult:
    config: ExperimentConfig
    records: Tuple[TrialRecord, ...]
    successes: int
    resumed: int
    fresh: int
    elapsed_s: float

    def render(self) -> str:
        cfg = self.config
        return "\n".join([
            f"run complete: {cfg.mode}/{cfg.kind}, scale {cfg.scale}, "
            f"p = {format_probability(cfg.p)}",
            f"seeds {cfg.base_seed}..{cfg.base_seed + cfg.trials - 1} "
            f"({self.resumed} resumed, {self.fresh} fresh)",
            f"successes: {self.successes}/{cfg.trials}",
            f"records: {cfg.output}",
            f"elapsed: {self.elapsed_s:.1f}s",
        ])


def _workers_from_env() -> int:
    raw = os.environ.get("PERC3D_WORKERS", "").strip()
    if raw:
        try:
            n = int(raw)
        except ValueError as exc:
            raise ConfigError(f"PERC3D_WORKERS must be an integer, got {raw!r}") from exc
        if n < 1:
            raise ConfigError(f"PERC3D_WORKERS must be >= 1, got {n}")
        return n
    return os.cpu_count() or 1


def run_experiment(cfg: ExperimentConfig, workers: Optional[int] = None,
                   ledger: Optional[Union[str, Path]] = None) -> RunResult:
    """Run (or resume) all trials of cfg, persisting records as they finish.

    Returns the same multiset of records (runtime fields aside) for any
    worker count or interruption pattern.
    """
    t0 = time.perf_counter()
    # Fail before any trial if the plan cannot certify anything.
    plan(cfg.mode, cfg.trials, cfg.alpha)
    # Fail before any trial on invalid geometry.
    if cfg.mode == "lower":
        make_block_geometry(cfg.scale, cfg.kind)
    else:
        make_rect_geometry(cfg.scale, cfg.kind)
    check_seed_ledger(cfg, ledger)

    out = Path(cfg.output)
    done: Dict[int, TrialRecord] = {}
    if out.exists() and out.stat().st_size > 0:
        existing = read_records(out)
        if existing.config.digest != cfg.digest:
            raise TamperError(
                f"{out}: holds records for a different experiment "
                f"(digest {existing.config.digest}, ours {cfg.digest})"
            )
        if existing.finalized:
            _check_complete(existing, out)
            record_in_ledger(cfg, ledger)
            return RunResult(config=cfg, records=existing.records,
                             successes=existing.successes,
                             resumed=len(existing.records), fresh=0,
                             elapsed_s=time.perf_counter() - t0)
        done = {r.seed: r for r in existing.records}
        fh = open(out, "a")
    else:
        out.parent.mkdir(parents=True, exist_ok=True)
        fh = open(out, "w")
        fh.write(RECORDS_HEADER + "\n")
        for line in format_config(cfg).splitlines():
            fh.write(f"#CONFIG {line}\n")
        fh.flush()

    pending = [s for s in cfg.seeds if s not in done]
    fresh = len(pending)
    if workers is None:
        workers = _workers_from_env()
    try:
        if workers <= 1 or not pending:
            for seed in pending:
                rec = run_trial(cfg, seed)
                fh.write(rec.line() + "\n")
                fh.flush()
                done[rec.seed] = rec
        else:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                chunk = max(1, len(pending) // (workers * 8))
                for rec in pool.map(_worker, [(cfg, s) for s in pending],
                                    chunksize=chunk):
                    fh.write(rec.line() + "\n")
                    fh.flush()
                    done[rec.seed] = rec
        records = tuple(done[s] for s in cfg.seeds)
        successes = sum(1 for r in records if r.event)
        fh.write(f"{SUMMARY_PREFIX} trials={cfg.trials} "
                 f"successes={successes} digest={cfg.digest}\n")
        fh.flush()
        os.fsync(fh.fileno())
    finally:
        fh.close()
    record_in_ledger(cfg, ledger)
    return RunResult(config=cfg, records=records, successes=successes,
                     resumed=cfg.trials - fresh, fresh=fresh,
                     elapsed_s=time.perf_counter() - t0)


@dataclass(frozen=True)
class Report:
    verdict: Verdict
    lower: RecordFile
    upper: RecordFile

    def render(self) -> str:
        lines = [self.verdict.render(), ""]
        lines.append("certification constants:")
        for key in ("p0_lower", "p0_upper"):
            c = CONSTANTS[key]
            lines.append(f"  {c.name} = {format_probability(c.value)} ({c.source})")
        gens = {self.lower.config.generator, self.upper.config.generator}
        lines.append(f"generator: {', '.join(sorted(gens))}")
        for role, rf in (("lower", self.lower), ("upper", self.upper)):
            bad = rf.bad_seeds()
            what = "event held" if rf.config.mode == "lower" else "event failed"
            shown = ", ".join(map(str, bad)) if bad else "none"
            lines.append(f"bad seeds ({role}, {what}): {len(bad)} of "
                         f"{rf.config.trials}: {shown}")
        return "\n".join(lines)


def report(lower_path: Union[str, Path], upper_path: Union[str, Path],
           alpha) -> Report:
    """Recompute counts from both record files and assemble the verdict."""
    lower_rf = read_records(lower_path)
    upper_rf = read_records(upper_path)
    _check_complete(lower_rf, lower_path)
    _check_complete(upper_rf, upper_path)
    if lower_rf.config.mode != "lower":
        raise ContractError(f"{lower_path}: expected a lower-mode record file")
    if upper_rf.config.mode != "upper":
        raise ContractError(f"{upper_path}: expected an upper-mode record file")
    v = verdict(
        (lower_rf.config.p, lower_rf.config.trials, lower_rf.successes),
        (upper_rf.config.p, upper_rf.config.trials, upper_rf.successes),
        alpha,
    )
    return Report(verdict=v, lower=lower_rf, upper=upper_rf)
