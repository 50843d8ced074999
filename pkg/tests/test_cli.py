import json

import pytest

from arqshare.cli import (
    CSV_HEADER,
    ExperimentConfig,
    LatencyBudget,
    budget,
    main,
    run_sweep,
    validate,
)


def write_config(tmp_path, name="cfg.json", **overrides):
    cfg = {
        "hops": 3,
        "los": 0.3,
        "snr_db": 15.0,
        "rate": 1.0,
        "q_sum": 9,
        "schemes": ["semi_cumulative"],
        "methods": ["exhaustive"],
        "trials": 0,
        "seed": 0,
    }
    cfg.update(overrides)
    cfg = {k: v for k, v in cfg.items() if v is not None}
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


# ---------------------------------------------------------------------------
# latency budget
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("total,tp,td,want", [
    (10.0, 0.6, 0.4, 10),
    (10.0, 0.7, 0.4, 9),
    (1.0, 0.6, 0.4, 1),
    (5.5, 0.5, 0.5, 5),
])
def test_budget_examples(total, tp, td, want):
    assert budget(LatencyBudget(tau_total=total, tau_p=tp, tau_d=td)) == want


def test_budget_rejects_hopeless_deadlines():
    with pytest.raises(ValueError):
        budget(LatencyBudget(tau_total=0.9, tau_p=0.6, tau_d=0.4))
    with pytest.raises(ValueError):
        budget(LatencyBudget(tau_total=10.0, tau_p=-0.1, tau_d=0.4))
    with pytest.raises(ValueError):
        budget(LatencyBudget(tau_total=10.0, tau_p=0.0, tau_d=0.0))


def test_budget_command_line(capsys):
    rc = main(["budget", "--tau-total", "10", "--tau-p", "0.6", "--tau-d", "0.4"])
    assert rc == 0
    assert capsys.readouterr().out.strip() == "10"
    rc = main(["budget", "--tau-total", "0.5", "--tau-p", "0.6", "--tau-d", "0.4"])
    assert rc == 2


# ---------------------------------------------------------------------------
# config parsing and validation
# ---------------------------------------------------------------------------

def test_config_singular_aliases():
    cfg = ExperimentConfig.from_dict({
        "hops": 2, "los": 0.3, "snr_db": 10.0, "rate": 1.0, "q_sum": 4,
        "scheme": "non_cooperative", "method": "exhaustive"})
    assert cfg.schemes == ["non_cooperative"]
    assert cfg.methods == ["exhaustive"]


def test_config_rejects_unknown_keys():
    with pytest.raises(ValueError, match="unknown config keys"):
        ExperimentConfig.from_dict({
            "hops": 2, "los": 0.3, "snr_db": 10.0, "rate": 1.0, "q_sum": 4,
            "budgett": 7})


def test_validate_accepts_good_config():
    cfg = ExperimentConfig(hops=3, los=0.3, snr_db=15.0, rate=1.0, q_sum=9)
    assert validate(cfg) == []


def test_validate_collects_multiple_problems():
    cfg = ExperimentConfig(hops=3, los=[0.3, 0.2], snr_db=None, rate=-1.0, q_sum=9)
    problems = validate(cfg)
    assert len(problems) >= 3
    assert any("los" in m for m in problems)
    assert any("rate" in m for m in problems)
    assert any("snr_db" in m for m in problems)


def test_validate_budget_source_is_exclusive():
    both = ExperimentConfig(hops=2, los=0.3, snr_db=10.0, rate=1.0, q_sum=5,
                            tau_total=10.0, tau_p=0.6, tau_d=0.4)
    assert any("mutually exclusive" in m for m in validate(both))
    neither = ExperimentConfig(hops=2, los=0.3, snr_db=10.0, rate=1.0)
    assert any("latency triple" in m for m in validate(neither))


def test_validate_rejects_folding_the_non_cooperative_objective():
    cfg = ExperimentConfig(hops=3, los=0.3, snr_db=10.0, rate=1.0, q_sum=9,
                           schemes=["non_cooperative"], methods=["onefold"])
    assert any("exhaustive" in m for m in validate(cfg))


def test_validate_checks_explicit_split():
    cfg = ExperimentConfig(hops=3, los=0.3, snr_db=10.0, rate=1.0, q_sum=9,
                           q=[1, 0, 8])
    assert any("feasible" in m for m in validate(cfg))


def test_validate_command_exit_codes(tmp_path, capsys):
    good = write_config(tmp_path, "good.json")
    assert main(["validate", "--config", good]) == 0
    out = capsys.readouterr().out
    assert "config ok" in out and "outage:" in out

    bad = write_config(tmp_path, "bad.json", hops=0)
    assert main(["validate", "--config", bad]) == 1
    assert "problem:" in capsys.readouterr().out


def test_validate_resolves_latency_budget(tmp_path, capsys):
    cfg = write_config(tmp_path, q_sum=None, tau_total=10.0, tau_p=0.7, tau_d=0.4)
    assert main(["validate", "--config", cfg]) == 0
    assert "q_sum: 9" in capsys.readouterr().out


# ---------------------------------------------------------------------------
# CSV output
# ---------------------------------------------------------------------------

def test_csv_header_is_pinned():
    assert CSV_HEADER == ("N,q_sum,snr_db,scheme,method,allocation,"
                          "pdp_analytic,pdp_sim,sim_stderr,list_size,elapsed_ms")


def test_optimize_csv_layout(tmp_path, capsys):
    cfg = write_config(tmp_path, hops=5, q_sum=10,
                       methods=["exhaustive", "onefold", "multifold", "greedy"])
    assert main(["optimize", "--config", cfg, "--threads", "1"]) == 0
    lines = capsys.readouterr().out.strip().split("\n")
    assert lines[0] == CSV_HEADER
    assert len(lines) == 5
    sizes = []
    for line, method in zip(lines[1:], ("exhaustive", "onefold", "multifold", "greedy")):
        cells = line.split(",")
        assert cells[0] == "5" and cells[1] == "10" and cells[4] == method
        assert cells[5].count("|") == 4  # allocation is q1|...|q5
        assert float(cells[6]) > 0.0
        assert cells[7] == "" and cells[8] == ""  # no trials requested
        assert cells[10] == ""                    # timing off by default
        sizes.append(int(cells[9]))
    exhaustive, onefold, multifold, greedy = sizes
    assert greedy < multifold < onefold < exhaustive
    # all four methods land on the same split here
    assert len({line.split(",")[5] for line in lines[1:]}) == 1


def test_pdp_subcommand_needs_a_split(tmp_path, capsys):
    cfg = write_config(tmp_path)
    assert main(["pdp", "--config", cfg]) == 2
    cfg_q = write_config(tmp_path, "with_q.json", q=[4, 2, 3])
    assert main(["pdp", "--config", cfg_q]) == 0
    lines = capsys.readouterr().out.strip().split("\n")
    row = lines[-1].split(",")
    assert row[5] == "4|2|3" and row[4] == "" and row[9] == ""


def test_simulate_subcommand(tmp_path, capsys):
    cfg = write_config(tmp_path, q=[4, 2, 3], trials=20_000)
    assert main(["simulate", "--config", cfg]) == 0
    row = capsys.readouterr().out.strip().split("\n")[-1].split(",")
    assert row[7] != "" and row[8] != ""
    assert 0.0 <= float(row[7]) <= 1.0
    cfg_no_trials = write_config(tmp_path, "no_trials.json", q=[4, 2, 3], trials=0)
    assert main(["simulate", "--config", cfg_no_trials]) == 2


def test_invalid_config_fails_loudly(tmp_path, capsys):
    cfg = write_config(tmp_path, hops=0)
    assert main(["optimize", "--config", cfg]) == 2
    assert "invalid config" in capsys.readouterr().err


def test_output_deterministic_across_runs_and_threads(tmp_path):
    cfg = write_config(tmp_path, schemes=["semi_cumulative", "non_cooperative"],
                       trials=30_000, sweep_q_sum=[6, 9], sweep_snr_db=[10.0, 15.0])
    outs = []
    for name, threads in [("a.csv", "1"), ("b.csv", "1"), ("c.csv", "6")]:
        out = tmp_path / name
        assert main(["sweep", "--config", cfg, "--threads", threads,
                     "--output", str(out)]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1] == outs[2]


def test_timing_flag_fills_elapsed_column(tmp_path, capsys):
    cfg = write_config(tmp_path)
    assert main(["optimize", "--config", cfg, "--timing"]) == 0
    row = capsys.readouterr().out.strip().split("\n")[-1].split(",")
    assert float(row[10]) > 0.0


def test_seed_flag_overrides_config(tmp_path, capsys):
    # low SNR so drops are common and the estimate actually moves with the seed
    cfg = write_config(tmp_path, q=[4, 2, 3], trials=10_000, seed=1, snr_db=0.0)
    main(["simulate", "--config", cfg])
    base = capsys.readouterr().out
    main(["simulate", "--config", cfg, "--seed", "1"])
    assert capsys.readouterr().out == base
    main(["simulate", "--config", cfg, "--seed", "2"])
    assert capsys.readouterr().out != base


def test_sweep_row_order_is_grid_major(tmp_path, capsys):
    cfg = write_config(tmp_path, schemes=["semi_cumulative", "non_cooperative"],
                       sweep_q_sum=[6, 9], sweep_snr_db=[10.0, 15.0])
    assert main(["sweep", "--config", cfg]) == 0
    rows = [line.split(",") for line in capsys.readouterr().out.strip().split("\n")[1:]]
    key = [(r[1], r[2], r[3]) for r in rows]
    want = [(q, s, sch) for q in ("6", "9") for s in ("10", "15")
            for sch in ("semi_cumulative", "non_cooperative")]
    assert key == want


def test_run_sweep_respects_latency_triple():
    cfg = ExperimentConfig(hops=3, los=0.3, snr_db=15.0, rate=1.0,
                           tau_total=10.0, tau_p=0.7, tau_d=0.4)
    rows = run_sweep(cfg, mode="optimize")
    assert rows[0].split(",")[1] == "9"
