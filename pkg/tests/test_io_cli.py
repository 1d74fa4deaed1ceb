import csv
import json

import numpy as np
import pytest

from fxtriangle import analytics
from fxtriangle.arbitrage import RiskProfile
from fxtriangle.calibration import default_parameters
from fxtriangle.cli import main
from fxtriangle.engine import SimulationConfig, run
from fxtriangle.io import (
    ConfigParseError,
    IngestError,
    align_mid_series,
    config_manifest,
    export_artifacts,
    ingest_records,
    load_mid_series,
    parse_config,
    synth_records,
)
from fxtriangle.lob import MarketId, Variant
from fxtriangle.trend import TrendScheme

HEADER = "Date,Timestamp,Market,Event,Direction,Depth,Price,Volume"


class TestParseConfig:
    def test_minimal_config_gets_defaults(self):
        config = parse_config("steps = 1000\nseed = 7\n")
        assert config.steps == 1000
        assert config.seed == 7
        assert config.arbitrager_enabled is True
        assert config.trend.window == 15
        assert config.trend.decay == 5.0
        assert config.trend.scheme is TrendScheme.EXPONENTIAL
        cal = config.calibration
        assert cal.trend_strength == (0.8, 0.8, 0.8)
        assert cal.mean_wait == 0.7
        assert cal.dt == 0.01
        assert cal.makers == (35, 45, 25)
        assert config.extended is None

    def test_comments_and_blank_lines(self):
        text = "# experiment\n\nsteps = 10   # ten\nseed = 1\n"
        assert parse_config(text).steps == 10

    def test_maker_counts_and_strengths(self):
        text = "steps=1\nseed=0\nn_eurusd=50\nn_usdjpy=35\nn_eurjpy=25\nc=0.5\n"
        config = parse_config(text)
        assert config.calibration.makers == (50, 35, 25)
        assert config.calibration.trend_strength == (0.5, 0.5, 0.5)

    def test_per_market_strength_refines_uniform(self):
        text = "steps=1\nseed=0\nc=0.5\nc_eurjpy=0.2\n"
        config = parse_config(text)
        assert config.calibration.trend_strength == (0.5, 0.5, 0.2)

    def test_maker_minimum_enforced_with_line_number(self):
        with pytest.raises(ConfigParseError, match="line 3: N must be >= 2"):
            parse_config("steps=1\nseed=0\nn_eurusd=1\n")

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigParseError, match="line 3: unknown key 'frobnicate'"):
            parse_config("steps=1\nseed=0\nfrobnicate=2\n")

    def test_missing_required_keys(self):
        with pytest.raises(ConfigParseError, match="steps"):
            parse_config("seed=0\n")
        with pytest.raises(ConfigParseError, match="seed"):
            parse_config("steps=10\n")

    def test_duplicate_key_rejected(self):
        with pytest.raises(ConfigParseError, match="duplicate"):
            parse_config("steps=1\nsteps=2\nseed=0\n")

    def test_extended_block(self):
        text = "steps=1\nseed=0\n[extended]\nlambda_a=0.01\nlambda_mm=0.001\ngamma=0.01\n"
        config = parse_config(text)
        assert config.extended == RiskProfile(0.01, 0.001, 0.01)

    def test_extended_per_market_scale(self):
        text = "steps=1\nseed=0\n[extended]\nlambda_mm_eurjpy=0.002\n"
        config = parse_config(text)
        assert config.extended.maker_scale == (0.0, 0.0, 0.002)

    def test_unknown_extended_key(self):
        with pytest.raises(ConfigParseError, match="unknown key 'zeta'"):
            parse_config("steps=1\nseed=0\n[extended]\nzeta=1\n")

    def test_dealer_variant_defaults_to_linear_trend(self):
        config = parse_config("steps=1\nseed=0\nvariant=dealer\n")
        assert config.variant is Variant.DEALER
        assert config.trend.scheme is TrendScheme.LINEAR

    def test_explicit_scheme_beats_variant_default(self):
        config = parse_config("steps=1\nseed=0\nvariant=dealer\ntrend_scheme=exponential\n")
        assert config.trend.scheme is TrendScheme.EXPONENTIAL

    def test_keyword_overrides(self):
        text = "steps=5\nseed=1\n"
        config = parse_config(text, seed=9, arbitrager=False, extended=True, variant=Variant.DEALER)
        assert config.seed == 9
        assert config.arbitrager_enabled is False
        assert config.extended == RiskProfile()
        assert config.variant is Variant.DEALER

    def test_bad_section(self):
        with pytest.raises(ConfigParseError, match="unknown section"):
            parse_config("steps=1\nseed=0\n[god-mode]\n")

    def test_manifest_round_trip_fields(self):
        config = parse_config("steps=42\nseed=3\nn_eurusd=8\n[extended]\ngamma=0.5\n")
        manifest = config_manifest(config)
        assert manifest["steps"] == 42
        assert manifest["calibration"]["makers"]["EURUSD"] == 8
        assert manifest["extended"]["gamma"] == 0.5


def rows(*lines):
    return "\n".join([HEADER, *lines]) + "\n"


class TestIngest:
    def test_single_quote_pair_forward_fills(self):
        text = rows(
            "2011-05-10,09.00.00.000,USD/JPY,Quote,Bid,1st,100.000,1",
            "2011-05-10,09.00.00.000,USD/JPY,Quote,Ask,1st,100.010,1",
            "2011-05-10,09.00.01.000,EUR/USD,Quote,Bid,1st,1.2500,2",
        )
        result = ingest_records(text)
        series = result.series[MarketId.USDJPY]
        assert series.mids == pytest.approx([100.005] * 11)
        assert MarketId.EURUSD not in result.series  # never two-sided

    def test_table_sample_rows_parse(self):
        text = rows(
            "2011-05-10,09.00.00.000,USD/JPY,Deal,Buy,1st,100.000,1",
            "2011-10-21,21.00.00.000,EUR/USD,Quote,Ask,3rd,0.8000,5",
        )
        result = ingest_records(text)
        assert result.records == 2
        assert result.deal_rows == 1
        assert result.series == {}

    def test_empty_input(self):
        result = ingest_records("")
        assert result.series == {} and result.records == 0

    def test_deep_quotes_do_not_move_mids(self):
        text = rows(
            "2011-05-10,09.00.00.000,USD/JPY,Quote,Bid,1st,100.000,1",
            "2011-05-10,09.00.00.000,USD/JPY,Quote,Ask,1st,100.010,1",
            "2011-05-10,09.00.00.200,USD/JPY,Quote,Ask,2nd,100.500,1",
        )
        result = ingest_records(text)
        assert result.series[MarketId.USDJPY].mids == pytest.approx([100.005, 100.005, 100.005])

    def test_malformed_row_reports_row_number(self):
        text = rows("2011-05-10,09.00.00.000,USD/JPY,Quote,Bid,1st,not-a-price,1")
        with pytest.raises(IngestError, match="row 2"):
            ingest_records(text)

    def test_out_of_order_timestamps_rejected(self):
        text = rows(
            "2011-05-10,09.00.01.000,USD/JPY,Quote,Bid,1st,100.000,1",
            "2011-05-10,09.00.00.000,USD/JPY,Quote,Ask,1st,100.010,1",
        )
        with pytest.raises(IngestError, match="out of order"):
            ingest_records(text)

    def test_bad_direction_for_event(self):
        text = rows("2011-05-10,09.00.00.000,USD/JPY,Quote,Buy,1st,100.000,1")
        with pytest.raises(IngestError, match="Bid/Ask"):
            ingest_records(text)

    def test_header_required(self):
        with pytest.raises(IngestError, match="header"):
            ingest_records("a,b,c\n1,2,3\n")

    def test_synth_round_trip_aligns_all_markets(self):
        text = synth_records(seconds=3.0, seed=5)
        result = ingest_records(text)
        start, aligned = align_mid_series(result)
        lengths = {series.size for series in aligned.values()}
        assert len(lengths) == 1
        assert lengths.pop() == 30
        for series in aligned.values():
            assert np.all(series > 0)

    def test_synth_is_deterministic(self):
        assert synth_records(seconds=1.0, seed=3) == synth_records(seconds=1.0, seed=3)


def small_run(steps=4000, seed=5):
    return run(SimulationConfig(steps=steps, seed=seed, calibration=default_parameters(makers=(6, 5, 4))))


class TestExport:
    def test_files_written(self, tmp_path):
        artifacts = small_run()
        files = export_artifacts(artifacts, tmp_path, omega_grid=(0.1, 1.0))
        names = {f.name for f in files}
        assert names == {
            "mid_series.csv",
            "correlations.csv",
            "config_stats.json",
            "opportunities.csv",
            "run_manifest.json",
        }

    def test_correlation_row_count(self, tmp_path):
        artifacts = small_run()
        export_artifacts(artifacts, tmp_path, omega_grid=(0.1, 1.0, 5.0))
        with (tmp_path / "correlations.csv").open() as fh:
            data_rows = list(csv.DictReader(fh))
        assert len(data_rows) == 3 * 3  # pairs x omega grid

    def test_infeasible_omegas_skipped(self, tmp_path):
        artifacts = small_run(steps=500)
        export_artifacts(artifacts, tmp_path, omega_grid=(0.1, 60.0))
        with (tmp_path / "correlations.csv").open() as fh:
            data_rows = list(csv.DictReader(fh))
        assert {r["omega_seconds"] for r in data_rows} == {"0.1"}

    def test_config_stats_rows_sum_to_one(self, tmp_path):
        artifacts = small_run()
        export_artifacts(artifacts, tmp_path, omega_grid=(0.1,))
        payload = json.loads((tmp_path / "config_stats.json").read_text())
        assert sum(payload["appearance_probability"].values()) == pytest.approx(1.0, abs=1e-12)
        for row in payload["transition_matrix"].values():
            total = sum(row.values())
            assert total == pytest.approx(1.0, abs=1e-9) or total == 0.0

    def test_opportunities_csv_schema(self, tmp_path):
        artifacts = small_run(steps=20_000, seed=1)
        export_artifacts(artifacts, tmp_path, omega_grid=(0.1,))
        with (tmp_path / "opportunities.csv").open() as fh:
            data_rows = list(csv.DictReader(fh))
        assert len(data_rows) == len(artifacts.opportunity_log)
        assert data_rows[0].keys() == {"step", "kind", "mu", "config"}
        assert all(float(r["mu"]) > 1.0 for r in data_rows)

    def test_mid_series_round_trip_preserves_correlations(self, tmp_path):
        artifacts = small_run()
        export_artifacts(artifacts, tmp_path, omega_grid=(0.5,))
        dt, series = load_mid_series(tmp_path / "mid_series.csv")
        assert dt == pytest.approx(0.01)
        for market in MarketId:
            assert np.array_equal(series[market], artifacts.mid_series[market])
        expected = analytics.cross_correlation(
            series[MarketId.USDJPY], series[MarketId.EURJPY], 0.5, dt
        )
        with (tmp_path / "correlations.csv").open() as fh:
            row = [
                r
                for r in csv.DictReader(fh)
                if r["pair"] == "USDJPY-EURJPY" and r["omega_seconds"] == "0.5"
            ][0]
        assert float(row["rho"]) == pytest.approx(expected, abs=1e-6)

    def test_exports_are_byte_deterministic(self, tmp_path):
        first_dir = tmp_path / "a"
        second_dir = tmp_path / "b"
        export_artifacts(small_run(), first_dir, omega_grid=(0.1, 1.0))
        export_artifacts(small_run(), second_dir, omega_grid=(0.1, 1.0))
        for name in ("mid_series.csv", "correlations.csv", "config_stats.json",
                     "opportunities.csv", "run_manifest.json"):
            assert (first_dir / name).read_bytes() == (second_dir / name).read_bytes()


CONFIG_TEXT = """\
steps = 3000
seed = 5
n_eurusd = 6
n_usdjpy = 5
n_eurjpy = 4
"""


class TestCli:
    def test_simulate(self, tmp_path, capsys):
        config_path = tmp_path / "exp.cfg"
        config_path.write_text(CONFIG_TEXT)
        out_dir = tmp_path / "out"
        assert main(["simulate", "--config", str(config_path), "--out", str(out_dir),
                     "--omega-grid", "0.1,1"]) == 0
        assert (out_dir / "mid_series.csv").exists()
        assert "simulated 3000 steps" in capsys.readouterr().out

    def test_simulate_seed_override_changes_manifest(self, tmp_path):
        config_path = tmp_path / "exp.cfg"
        config_path.write_text(CONFIG_TEXT)
        out_dir = tmp_path / "out"
        main(["simulate", "--config", str(config_path), "--out", str(out_dir),
              "--seed", "99", "--omega-grid", "0.1"])
        manifest = json.loads((out_dir / "run_manifest.json").read_text())
        assert manifest["seed"] == 99

    def test_no_arbitrager_flag(self, tmp_path):
        config_path = tmp_path / "exp.cfg"
        config_path.write_text(CONFIG_TEXT)
        out_dir = tmp_path / "out"
        main(["simulate", "--config", str(config_path), "--out", str(out_dir),
              "--no-arbitrager", "--omega-grid", "0.1"])
        manifest = json.loads((out_dir / "run_manifest.json").read_text())
        assert manifest["arbitrager_enabled"] is False
        with (out_dir / "opportunities.csv").open() as fh:
            assert list(csv.DictReader(fh)) == []

    def test_sweep_writes_per_seed_directories(self, tmp_path):
        config_path = tmp_path / "exp.cfg"
        config_path.write_text(CONFIG_TEXT)
        out_dir = tmp_path / "runs"
        assert main(["sweep", "--config", str(config_path), "--out", str(out_dir),
                     "--seeds", "1,2", "--omega-grid", "0.1"]) == 0
        assert (out_dir / "seed_1" / "mid_series.csv").exists()
        assert (out_dir / "seed_2" / "run_manifest.json").exists()

    def test_synth_ingest_analyze_pipeline(self, tmp_path):
        fixture = tmp_path / "ticks.csv"
        assert main(["synth", "--out", str(fixture), "--seconds", "10", "--seed", "3"]) == 0
        ingest_dir = tmp_path / "ingested"
        assert main(["ingest", "--in", str(fixture), "--out", str(ingest_dir)]) == 0
        mids = ingest_dir / "mid_series.csv"
        assert mids.exists()
        analyze_dir = tmp_path / "analysis"
        assert main(["analyze", "--mids", str(mids), "--out", str(analyze_dir),
                     "--omega-grid", "0.5,1"]) == 0
        with (analyze_dir / "correlations.csv").open() as fh:
            data_rows = list(csv.DictReader(fh))
        assert len(data_rows) == 6
        for row in data_rows:
            assert -1.0 <= float(row["rho"]) <= 1.0

    def test_ingest_export_ingest_idempotent(self, tmp_path):
        fixture = tmp_path / "ticks.csv"
        main(["synth", "--out", str(fixture), "--seconds", "5", "--seed", "11"])
        first_dir = tmp_path / "first"
        main(["ingest", "--in", str(fixture), "--out", str(first_dir)])
        dt, series = load_mid_series(first_dir / "mid_series.csv")
        assert dt == pytest.approx(0.1)
        result = ingest_records(fixture.read_text())
        _, aligned = align_mid_series(result)
        for market in MarketId:
            assert np.array_equal(series[market], aligned[market])
