from fractions import Fraction

import pytest

from perc3d import (
    ExperimentConfig,
    format_config,
    parse_config,
    read_records,
    report,
    run_experiment,
    run_trial,
)
from perc3d.errors import (
    ConfigError,
    ContractError,
    IncompleteRunError,
    InfeasiblePlanError,
    RecordFormatError,
    SeedLedgerError,
    TamperError,
)
from perc3d.runner import TrialRecord, parse_record
from helpers import synth_records

LAX = Fraction(1, 2)
STRICT = Fraction(999999, 1000000)


def cfg_for(tmp_path, name="run.rec", **kw):
    base = dict(mode="lower", kind="bond", scale=8, p=Fraction(1, 20),
                trials=50, base_seed=1000, alpha=LAX,
                output=str(tmp_path / name))
    base.update(kw)
    return ExperimentConfig(**base)


def stable(records):
    return [r.stable_fields() for r in records]


def test_run_is_deterministic(tmp_path):
    r1 = run_experiment(cfg_for(tmp_path, "a.rec"), workers=1)
    r2 = run_experiment(cfg_for(tmp_path, "b.rec"), workers=1)
    assert stable(r1.records) == stable(r2.records)
    assert r1.successes == r2.successes
    assert len(r1.records) == 50


def test_parallel_schedule_equivalent(tmp_path):
    r1 = run_experiment(cfg_for(tmp_path, "serial.rec"), workers=1)
    r2 = run_experiment(cfg_for(tmp_path, "par.rec"), workers=3)
    assert sorted(stable(r1.records)) == sorted(stable(r2.records))


def test_rerun_finalized_is_idempotent(tmp_path):
    cfg = cfg_for(tmp_path)
    r1 = run_experiment(cfg, workers=1)
    r2 = run_experiment(cfg, workers=1)
    assert r2.fresh == 0 and r2.resumed == 50
    assert stable(r1.records) == stable(r2.records)


def test_crash_resume_completes_identically(tmp_path):
    full = run_experiment(cfg_for(tmp_path, "full.rec"), workers=1)
    cfg = cfg_for(tmp_path, "crash.rec")
    run_experiment(cfg, workers=1)
    out = tmp_path / "crash.rec"
    lines = out.read_text().splitlines()
    # simulate a crash: keep header + config + first 20 records
    out.write_text("\n".join(lines[:10 + 20]) + "\n")
    resumed = run_experiment(cfg, workers=1)
    assert resumed.resumed == 20 and resumed.fresh == 30
    assert stable(resumed.records) == stable(full.records)
    assert read_records(out).finalized


def test_p_one_all_events_hold(tmp_path):
    cfg = cfg_for(tmp_path, p=Fraction(1), base_seed=4000)
    assert run_experiment(cfg, workers=1).successes == 50


def test_ledger_refuses_different_experiment(tmp_path):
    run_experiment(cfg_for(tmp_path, "one.rec"), workers=1)
    clash = cfg_for(tmp_path, "two.rec", p=Fraction(1, 10), base_seed=1025)
    with pytest.raises(SeedLedgerError):
        run_experiment(clash, workers=1)
    # disjoint range is fine
    ok = cfg_for(tmp_path, "three.rec", p=Fraction(1, 10), base_seed=2000)
    run_experiment(ok, workers=1)


def test_ledger_allows_reproduction(tmp_path):
    run_experiment(cfg_for(tmp_path, "one.rec"), workers=1)
    # same experiment, fresh output file: allowed
    run_experiment(cfg_for(tmp_path, "repro.rec"), workers=1)


def test_infeasible_plan_blocks_run(tmp_path):
    cfg = cfg_for(tmp_path, trials=10, alpha=STRICT)
    with pytest.raises(InfeasiblePlanError):
        run_experiment(cfg, workers=1)
    assert not (tmp_path / "run.rec").exists()


def test_config_round_trip(tmp_path):
    cfg = cfg_for(tmp_path)
    assert parse_config(format_config(cfg)) == cfg


def test_config_scale_aliases(tmp_path):
    text = format_config(cfg_for(tmp_path)).replace("scale=8", "L=8")
    assert parse_config(text).scale == 8
    text2 = format_config(cfg_for(tmp_path, mode="upper", scale=4,
                                  p=Fraction(9, 10))).replace("scale=4", "s=4")
    assert parse_config(text2).scale == 4


def test_config_rejects_unknown_and_duplicates(tmp_path):
    text = format_config(cfg_for(tmp_path))
    with pytest.raises(ConfigError):
        parse_config(text + "trails=800\n")
    with pytest.raises(ConfigError):
        parse_config(text + "trials=60\n")
    with pytest.raises(ConfigError):
        parse_config("mode=lower\n")


def test_config_validation():
    with pytest.raises(ConfigError):
        ExperimentConfig(mode="middle", kind="bond", scale=8, p=Fraction(1, 2),
                         trials=5, base_seed=0, alpha=LAX, output="x")
    with pytest.raises(ConfigError):
        ExperimentConfig(mode="lower", kind="bond", scale=8, p=Fraction(3, 2),
                         trials=5, base_seed=0, alpha=LAX, output="x")
    with pytest.raises(ConfigError):
        ExperimentConfig(mode="lower", kind="bond", scale=8, p=Fraction(1, 2),
                         trials=5, base_seed=0, alpha=LAX, output="x",
                         generator="mt19937")


def test_digest_ignores_output_location(tmp_path):
    a = cfg_for(tmp_path, "a.rec")
    b = cfg_for(tmp_path, "b.rec")
    assert a.digest == b.digest
    c = cfg_for(tmp_path, "c.rec", p=Fraction(1, 19))
    assert c.digest != a.digest


def test_record_line_round_trip():
    rec = TrialRecord(seed=12, event=True, ms=7, digest="abc123",
                      witness="v=3;s1=1;s2=2")
    assert parse_record(rec.line()) == rec
    with pytest.raises(RecordFormatError):
        parse_record("seed=1 event=yes ms=2 digest=x")
    with pytest.raises(RecordFormatError):
        parse_record("gibberish")


def test_run_trial_produces_witness_on_success(tmp_path):
    cfg = cfg_for(tmp_path, p=Fraction(1), base_seed=9000)
    rec = run_trial(cfg, 9000)
    assert rec.event and rec.witness and rec.digest == cfg.digest


def test_report_reproduces_pinned_intervals(tmp_path):
    lo = tmp_path / "lo.rec"
    hi = tmp_path / "hi.rec"
    synth_records(lo, "lower", "bond", 120, Fraction(2485, 10000), 800, 12345, 4)
    synth_records(hi, "upper", "bond", 212, Fraction(2490, 10000), 400, 123456, 400)
    rep = report(lo, hi, STRICT)
    assert (rep.verdict.p_lo, rep.verdict.p_hi) == \
        (Fraction(2485, 10000), Fraction(2490, 10000))
    text = rep.render()
    assert "numpy-pcg64" in text
    assert "bad seeds" in text
    assert "12345, 12346, 12347, 12348" in text

    lo2 = tmp_path / "lo2.rec"
    hi2 = tmp_path / "hi2.rec"
    synth_records(lo2, "lower", "site", 120, Fraction(3110, 10000), 800, 1234567, 4)
    synth_records(hi2, "upper", "site", 212, Fraction(3118, 10000), 400, 12345678, 397)
    rep2 = report(lo2, hi2, STRICT)
    assert (rep2.verdict.p_lo, rep2.verdict.p_hi) == \
        (Fraction(3110, 10000), Fraction(3118, 10000))


def test_report_failed_lower_warns(tmp_path):
    lo = tmp_path / "lo.rec"
    hi = tmp_path / "hi.rec"
    synth_records(lo, "lower", "bond", 120, Fraction(2485, 10000), 800, 12345, 5)
    synth_records(hi, "upper", "bond", 212, Fraction(2490, 10000), 400, 123456, 400)
    rep = report(lo, hi, STRICT)
    assert rep.verdict.p_lo == 0
    assert rep.verdict.warnings


def test_report_requires_finalization(tmp_path):
    lo = tmp_path / "lo.rec"
    hi = tmp_path / "hi.rec"
    synth_records(lo, "lower", "bond", 120, Fraction(2485, 10000), 800, 12345, 4,
                  finalize=False)
    synth_records(hi, "upper", "bond", 212, Fraction(2490, 10000), 400, 123456, 400)
    with pytest.raises(IncompleteRunError):
        report(lo, hi, STRICT)


def test_report_detects_tampering(tmp_path):
    lo = tmp_path / "lo.rec"
    hi = tmp_path / "hi.rec"
    synth_records(lo, "lower", "bond", 120, Fraction(2485, 10000), 800, 12345, 4)
    synth_records(hi, "upper", "bond", 212, Fraction(2490, 10000), 400, 123456, 400)
    flipped = lo.read_text().replace("seed=12350 event=0", "seed=12350 event=1")
    lo.write_text(flipped)
    with pytest.raises(TamperError):
        report(lo, hi, STRICT)


def test_read_records_rejects_foreign_digest(tmp_path):
    lo = tmp_path / "lo.rec"
    synth_records(lo, "lower", "bond", 120, Fraction(2485, 10000), 800, 12345, 4)
    text = lo.read_text()
    first_rec = next(l for l in text.splitlines() if l.startswith("seed="))
    digest = first_rec.split("digest=")[1].split()[0]
    lo.write_text(text.replace(f"seed=12345 event=1 ms=0 digest={digest}",
                               "seed=12345 event=1 ms=0 digest=deadbeef0000"))
    with pytest.raises(TamperError):
        read_records(lo)


def test_read_records_rejects_duplicates_and_trailing(tmp_path):
    lo = tmp_path / "lo.rec"
    cfg = synth_records(lo, "lower", "bond", 120, Fraction(2485, 10000), 800,
                        12345, 4)
    dup = lo.read_text() + f"seed=12345 event=1 ms=0 digest={cfg.digest}\n"
    lo.write_text(dup)
    with pytest.raises(TamperError):
        read_records(lo)


def test_report_mode_mismatch(tmp_path):
    lo = tmp_path / "lo.rec"
    hi = tmp_path / "hi.rec"
    synth_records(lo, "lower", "bond", 120, Fraction(2485, 10000), 800, 12345, 4)
    synth_records(hi, "upper", "bond", 212, Fraction(2490, 10000), 400, 123456, 400)
    with pytest.raises(ContractError):
        report(hi, lo, STRICT)
