import csv

import pytest

from rtoffload.harness import (CSV_HEADER, ConfigError, ScenarioConfig, World, parse_config,
                               run_scenario, scenario_base, sweep, write_csv)
from rtoffload.harness.cli import main
from rtoffload.harness.config import dump_config
from rtoffload.harness.plots import PlotError, emit_plots
from rtoffload.harness.sweep import format_csv, plan_runs
from rtoffload.harness.world import TRACE_FIELDS

SHORT = dict(duration_s=10.0)


def test_unloaded_system_is_perfect():
    config = ScenarioConfig(num_clients=1, wireless_stddev_us=0, laxity_mean_us=5_000_000,
                            laxity_stddev_us=0, duration_s=30)
    for scheduler in ("latency_aware", "reference"):
        m = run_scenario(config.replace(scheduler=scheduler), strict=True).metrics
        assert m.submitted > 10
        assert m.success_rate == 1.0 and m.rejected == 0 and m.missed == 0


def test_same_seed_same_result_different_seed_differs():
    config = ScenarioConfig(num_clients=20, **SHORT)
    a, b = run_scenario(config, trace=True), run_scenario(config, trace=True)
    assert a.metrics == b.metrics and a.trace == b.trace
    assert run_scenario(config.replace(seed=1)).metrics != a.metrics


def test_rejections_reach_clients_before_deadline():
    config = ScenarioConfig(num_clients=40, wireless_stddev_us=0, laxity_mean_us=60_000, **SHORT)
    world_result = run_scenario(config, strict=True, trace=True)
    assert world_result.metrics.rejected > 0
    world = World(config)
    world.run()
    leads = [lead for c in world.clients for lead in c.fallback_leads]
    # arrival < deadline  <=>  lead > -wcet
    assert leads and all(lead > -config.wcet_us for lead in leads)


def test_counters_are_conserved_and_no_events_lost():
    for scheduler in ("latency_aware", "reference"):
        r = run_scenario(ScenarioConfig(scheduler=scheduler, num_clients=30, **SHORT), strict=True)
        m = r.metrics
        assert m.submitted == m.accepted + m.rejected
        assert m.accepted == m.completed_on_time + m.missed + m.in_flight_at_end
        assert r.events_fired > 0


def test_trace_fields():
    r = run_scenario(ScenarioConfig(num_clients=5, **SHORT), trace=True)
    assert r.trace and all(tuple(row) == TRACE_FIELDS for row in r.trace)
    assert {row["verdict"] for row in r.trace} <= {"rejected", "on_time", "missed"}


class TestConfig:
    def test_round_trip(self):
        config = ScenarioConfig(num_clients=7, uncertainty_factor=1.25, laxity_stddev_us=None,
                                wireless_bandwidth=1e6)
        assert parse_config(dump_config(config)) == config

    def test_comments_and_blanks(self):
        text = "# header\n\nnum_clients = 12  # inline\nheuristic=best_fit\n"
        config = parse_config(text)
        assert config.num_clients == 12 and config.heuristic == "best_fit"

    @pytest.mark.parametrize("text", ["bogus=1\n", "num_clients=1\nnum_clients=2\n",
                                      "num_clients\n", "num_clients=abc\n", "num_workers=0\n",
                                      "scheduler=fifo\n", "arrival_rate=-1\n"])
    def test_errors(self, text):
        with pytest.raises(ConfigError):
            parse_config(text)


class TestSweep:
    def test_header_is_exact(self):
        assert ",".join(CSV_HEADER) == (
            "run_id,scenario,scheduler,heuristic,u_factor,clients,workers,laxity_mean_ms,"
            "latency_mean_ms,latency_std_ms,seed,submitted,accepted,rejected,completed_on_time,"
            "missed,in_flight_at_end,success_rate,miss_rate,mean_response_ms,mean_fallback_lead_ms")

    def test_scenario2_plan(self):
        configs = plan_runs(scenario_base("2"), "laxity", (180, 150, 120, 90, 60), [0])
        assert len(configs) == 25
        assert sorted({c.laxity_mean_us for c in configs}) == [60_000, 90_000, 120_000, 150_000, 180_000]
        assert sum(c.scheduler == "reference" for c in configs) == 5

    def test_scenario3_axis(self):
        configs = plan_runs(scenario_base("3"), "latency_std", (10, 20, 30, 40, 50), [0, 1])
        assert sorted({c.wireless_stddev_us for c in configs}) == [10_000, 20_000, 30_000, 40_000, 50_000]

    def test_single_point_single_seed(self):
        rows = sweep(scenario_base("1", duration_s=2), "clients", [5], [0])
        assert len(rows) == 5
        assert [r["u_factor"] for r in rows] == ["0.5", "0.75", "1", "1.25", ""]
        assert rows[-1]["heuristic"] == "none"

    def test_output_is_byte_identical_and_job_independent(self):
        base = scenario_base("2", duration_s=3)
        one = format_csv(sweep(base, "laxity", [60, 120], [0, 1]))
        again = format_csv(sweep(base, "laxity", [120, 60], [1, 0], jobs=2))
        assert one == again


class TestPlots:
    def write_rows(self, tmp_path, rows):
        path = tmp_path / "r.csv"
        write_csv(rows, path)
        return path

    def test_one_row_still_plots(self, tmp_path):
        rows = sweep(scenario_base("1", duration_s=1), "clients", [3], [0], u_values=[1.0],
                     include_reference=False)
        out = emit_plots(self.write_rows(tmp_path, rows), tmp_path / "png")
        assert [p.name for p in out] == ["scenario_1.png"] and out[0].stat().st_size > 0

    def test_empty_csv(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text(",".join(CSV_HEADER) + "\n")
        with pytest.raises(PlotError):
            emit_plots(path, tmp_path / "png")
        assert not (tmp_path / "png").exists()

    def test_malformed_row_is_named(self, tmp_path):
        rows = sweep(scenario_base("1", duration_s=1), "clients", [3], [0], u_values=[1.0])
        rows[1]["submitted"] = "lots"
        with pytest.raises(PlotError, match="row 3"):
            emit_plots(self.write_rows(tmp_path, rows), tmp_path / "png")

    def test_wrong_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b\n1,2\n")
        with pytest.raises(PlotError):
            emit_plots(path, tmp_path)


class TestCli:
    def test_run_writes_results_and_trace(self, tmp_path, capsys):
        cfg = tmp_path / "c.cfg"
        cfg.write_text("num_clients=4\nduration_s=3\n")
        assert main(["run", "--config", str(cfg), "--out", str(tmp_path), "--trace"]) == 0
        with open(tmp_path / "results.csv") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 1 and tuple(rows[0]) == CSV_HEADER
        assert (tmp_path / "trace.csv").read_text().startswith(",".join(TRACE_FIELDS))

    def test_sweep_then_plot(self, tmp_path):
        assert main(["sweep", "--scenario", "3", "--values", "10", "--seeds", "0",
                     "--duration", "2", "--out", str(tmp_path)]) == 0
        assert main(["plot", "--csv", str(tmp_path / "scenario3.csv"),
                     "--out", str(tmp_path / "figs")]) == 0
        assert (tmp_path / "figs" / "scenario_3.png").exists()

    def test_bad_config_exit_code(self, tmp_path, capsys):
        cfg = tmp_path / "c.cfg"
        cfg.write_text("nope=1\n")
        assert main(["run", "--config", str(cfg), "--out", str(tmp_path)]) == 2
        assert "unknown key" in capsys.readouterr().err

    def test_missing_file_exit_code(self, tmp_path):
        assert main(["plot", "--csv", str(tmp_path / "missing.csv"), "--out", str(tmp_path)]) == 2
