import dataclasses

import numpy as np
import pytest

from twoway_relay.channel import ScenarioConfig, draw_channels
from twoway_relay.exceptions import DegenerateChannelError, SolverError
from twoway_relay.harness import cli
from twoway_relay.harness.experiments import (
    DEFAULT_SNR_GRID_DB,
    REGION_COLUMNS,
    SUMRATE_COLUMNS,
    fmt,
    rate_region,
    sumrate_sweep,
    to_csv_text,
    write_region_csv,
    write_sumrate_csv,
)
from twoway_relay.harness.montecarlo import ResampleRateError, run_monte_carlo
from twoway_relay.harness.validate import run_validation
from twoway_relay.reduction import lift

CONFIG = "K_T = 4\nM = 8\np_source_db = 10\np_relay_db = 10\nrho = 0\nseed = 5\ntrials = {trials}\n"


def _draw(rng):
    return draw_channels(2, 2, 0.0, rng)


def _stat(ch):
    return [np.abs(ch.H[0, 0]) ** 2, ch.H[1, 1].real]


def test_monte_carlo_is_order_and_worker_independent():
    a = run_monte_carlo(3, 40, _draw, _stat, workers=1)
    b = run_monte_carlo(3, 40, _draw, _stat, workers=4)
    assert np.array_equal(a.samples, b.samples)
    assert a.samples.shape == (40, 2)
    assert np.array_equal(a.stderr, a.samples.std(axis=0, ddof=1) / np.sqrt(40))


def test_stderr_shrinks_like_inverse_sqrt():
    small = run_monte_carlo(1, 2000, _draw, _stat).stderr[0]
    large = run_monte_carlo(1, 8000, _draw, _stat).stderr[0]
    assert small / large == pytest.approx(2.0, rel=0.1)


def test_degenerate_trials_are_redrawn_and_counted():
    calls = {}

    def flaky(ch):
        t = calls.setdefault("n", 0)
        calls["n"] += 1
        if t == 0:
            raise DegenerateChannelError("bad draw")
        if t == 1:
            raise SolverError("stalled")
        return [1.0]

    res = run_monte_carlo(0, 300, _draw, flaky)
    assert res.resampled == 1 and res.solver_failures == 1
    assert res.trials == 300


def test_too_many_rejections_fail_the_run():
    def half_rejected(ch):
        if ch.H[0, 0].real > 0:
            raise DegenerateChannelError("rejects about half of all draws")
        return [0.0]

    with pytest.raises(ResampleRateError) as err:
        run_monte_carlo(0, 50, _draw, half_rejected)
    assert err.value.result.resampled > 10


def test_hopeless_trial_is_reported():
    def never(ch):
        raise SolverError("always fails")

    with pytest.raises(ResampleRateError):
        run_monte_carlo(0, 2, _draw, never)


def test_fmt_uses_nine_significant_digits():
    assert fmt(np.pi) == "3.14159265"
    assert fmt(3) == "3" and fmt("best") == "best"


def test_default_snr_grid():
    assert DEFAULT_SNR_GRID_DB[0] == -5.0 and DEFAULT_SNR_GRID_DB[-1] == 25.0
    assert np.allclose(np.diff(DEFAULT_SNR_GRID_DB), 2.5)


def _region_config(trials=3):
    return ScenarioConfig(4, 8, 10.0, 10.0, seed=5, trials=trials)


def test_rate_region_csv_layout():
    pts = rate_region(_region_config(), num_points=3)
    text = to_csv_text(write_region_csv, pts)
    lines = text.splitlines()
    assert lines[0] == ",".join(REGION_COLUMNS)
    assert [ln.split(",")[0] for ln in lines[1:]] == ["MI"] * 3 + ["MP"] * 3
    # sweep endpoints: (max, 0) and (0, max)
    first, last = pts[0], pts[2]
    assert first.rate_pair2 == 0 and first.rate_pair1 > 0
    assert last.rate_pair1 == 0 and last.rate_pair2 > 0


def test_rate_region_beta_sweep_and_scheme_filter():
    pts = rate_region(_region_config(2), num_points=3, schemes=("MI",), mi_sweep="beta")
    assert [p.scheme for p in pts] == ["MI"] * 3
    assert [p.sweep_param for p in pts] == [0.0, 0.5, 1.0]
    with pytest.raises(ValueError):
        rate_region(_region_config(2), num_points=3, mi_sweep="grid")


def test_rate_region_needs_four_sources():
    from twoway_relay.exceptions import ConfigError

    with pytest.raises(ConfigError) as err:
        rate_region(ScenarioConfig(6, 8, 10.0, 10.0), num_points=3)
    assert err.value.key == "K_T"


def test_sumrate_rows_and_envelope():
    cfg = ScenarioConfig(8, 8, 10.0, 10.0, seed=1, trials=4)
    rows, res = sumrate_sweep(cfg, snr_grid_db=(0.0, 20.0))
    assert [(r.snr_db, r.N) for r in rows] == [(s, n) for s in (0.0, 20.0) for n in (1, 2, 4, "best")]
    samples = res.samples
    assert np.all(samples[:, :, -1] == samples[:, :, :-1].max(axis=2))
    text = to_csv_text(write_sumrate_csv, rows)
    assert text.splitlines()[0] == ",".join(SUMRATE_COLUMNS)
    assert text.splitlines()[4].startswith("0,best,")


def test_sumrate_rejects_bad_groups():
    from twoway_relay.exceptions import ConfigError

    with pytest.raises(ConfigError):
        sumrate_sweep(ScenarioConfig(8, 8, 10.0, 10.0), groups=(3,))


def test_validate_default_passes():
    report = run_validation(instances=40)
    assert report.passed, report.lines()
    assert any("ridge" in note for note in report.flagged)


def test_validate_detects_transposed_lift():
    report = run_validation(instances=8, lift_fn=lambda B, U: U @ B @ U.T)
    assert "subspace_equivalence" in report.failures


def test_validate_detects_wrong_scale_of_lift():
    report = run_validation(instances=4, lift_fn=lambda B, U: 1.001 * lift(B, U))
    assert report.failures == ["subspace_equivalence"]


# --- command line -----------------------------------------------------------


def test_cli_rate_region_is_bit_identical(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text(CONFIG.format(trials=1))
    outs = []
    for i, workers in enumerate((1, 3)):
        out = tmp_path / f"o{i}.csv"
        assert cli.run(["rate-region", "--config", str(cfg), "--out", str(out), "--points", "3",
                        "--workers", str(workers)]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_cli_overrides_and_scheme(tmp_path, capsys):
    cfg = tmp_path / "c.cfg"
    cfg.write_text(CONFIG.format(trials=50))
    assert cli.run(["rate-region", "--config", str(cfg), "--trials", "2", "--seed", "9", "--scheme", "mp",
                    "--points", "2"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 3 and all(ln.startswith("MP,") for ln in lines[1:])
    assert lines[1].split(",")[4] == "2"


def test_cli_sumrate(tmp_path):
    out = tmp_path / "s.csv"
    assert cli.run(["sumrate", "--trials", "2", "--snr-db", "0,20", "--groups", "1,4", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "snr_db,N,sum_rate,stderr"
    assert [ln.split(",")[1] for ln in lines[1:]] == ["1", "4", "best"] * 2


@pytest.mark.parametrize(
    "text, key",
    [(CONFIG.replace("rho = 0", "rho = 1.5"), "rho"), (CONFIG.replace("M = 8\n", ""), "M"),
     (CONFIG.replace("K_T = 4", "K_T = 5"), "K_T"), (CONFIG.replace("seed = 5", "seed = abc"), "seed")],
)
def test_cli_config_errors_exit_2_and_name_key(tmp_path, capsys, text, key):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text(text.format(trials=1))
    assert cli.run(["sumrate", "--config", str(cfg)]) == 2
    assert f"{key}:" in capsys.readouterr().err


def test_cli_missing_file_and_bad_override(tmp_path, capsys):
    assert cli.run(["sumrate", "--config", str(tmp_path / "nope.cfg")]) == 2
    cfg = tmp_path / "c.cfg"
    cfg.write_text(CONFIG.format(trials=1))
    assert cli.run(["rate-region", "--config", str(cfg), "--trials", "0"]) == 2
    assert "trials" in capsys.readouterr().err


def test_cli_resample_overflow_exits_3(monkeypatch, capsys):
    import twoway_relay.harness.experiments as exp

    def explode(*a, **k):
        raise ResampleRateError("too many", None)

    monkeypatch.setattr(exp, "run_monte_carlo", explode)
    assert cli.run(["sumrate", "--trials", "1"]) == 3


def test_cli_validate_exit_codes(monkeypatch, capsys):
    assert cli.run(["validate", "--instances", "8"]) == 0
    assert "result=PASS" in capsys.readouterr().out
    import twoway_relay.harness.validate as val

    monkeypatch.setattr(val, "lift", lambda B, U: U @ B @ U.T)
    monkeypatch.setattr(cli, "run_validation", lambda **kw: val.run_validation(lift_fn=val.lift, **kw))
    assert cli.run(["validate", "--instances", "8"]) == 1
    assert cli.run(["validate", "--sizes", "3x4"]) == 2
