"""Driver plumbing: config text, descriptor grammar, reports, exit codes."""

import json

import numpy as np
import pytest

from iml.cli import (ConfigError, ExperimentConfig, apply_config, config_lines,
                     main, parse_config_text, parse_cvec, parse_domain)


def run(capsys, argv, env=None, monkeypatch=None):
    if env and monkeypatch:
        for k, v in env.items():
            monkeypatch.setenv(k, v)
    rc = main(argv)
    out = capsys.readouterr()
    return rc, out.out, out.err


def test_print_defaults_lists_every_section(capsys):
    rc, out, _ = run(capsys, ["--print-defaults"])
    assert rc == 0
    for key in ("domain = unit-disc", "search.degree", "higher.restarts",
                "schedule.rho0", "curve.partitions", "example3.K", "verify.cases"):
        assert key in out


def test_config_text_roundtrip():
    cfg = ExperimentConfig()
    flat = parse_config_text("\n".join(config_lines(cfg)))
    assert apply_config(cfg, flat) == cfg


def test_config_overrides_and_errors():
    cfg = apply_config(ExperimentConfig(), {"seed": "7", "search.degree": "8"})
    assert cfg.seed == 7 and cfg.search.degree == 8
    with pytest.raises(ConfigError):
        apply_config(ExperimentConfig(), {"nope": "1"})
    with pytest.raises(ConfigError):
        apply_config(ExperimentConfig(), {"search.nope": "1"})
    with pytest.raises(ConfigError):
        apply_config(ExperimentConfig(), {"search.degree": "many"})
    with pytest.raises(ConfigError):
        parse_config_text("just words\n")


def test_domain_grammar():
    assert parse_domain("unit-disc") == {"kind": "unit-disc"}
    d = parse_domain("polydisc:radii=1,2")
    assert d["radii"] == [1.0, 2.0]
    d = parse_domain("ball:radius=1.5;dimension=2")
    assert d == {"kind": "ball", "radius": 1.5, "dimension": 2}
    d = parse_domain("balanced:h=max-geo")
    assert d == {"kind": "balanced", "h": "max-geo"}
    with pytest.raises(ConfigError):
        parse_domain("polydisc:radii")


def test_cvec_parsing():
    v = parse_cvec("0.3+0.2j,-0.5j", "--z")
    assert np.allclose(v, [0.3 + 0.2j, -0.5j])
    with pytest.raises(ConfigError):
        parse_cvec("one,two", "--z")


def test_metric_subcommand_product_value(capsys):
    rc, out, _ = run(capsys, ["metric", "--domain", "polydisc",
                              "--z", "0,0", "--X", "1,2"])
    assert rc == 0
    header, row = out.strip().splitlines()
    cells = dict(zip(header.split(","), row.split(",")))
    assert float(cells["value"]) == pytest.approx(2.0, rel=0.01)
    assert cells["oracle"] == "2"
    assert cells["kind"] == "upper-bound"


def test_exit_codes(capsys):
    rc, _, err = run(capsys, ["metric", "--domain", "polydisc",
                              "--z", "0,0", "--X", "bogus"])
    assert rc == 2 and "bad --X" in err
    rc, _, err = run(capsys, ["metric", "--domain", "polydisc:radii=-1,1",
                              "--z", "0,0", "--X", "1,1"])
    assert rc == 3
    rc, _, err = run(capsys, ["metric", "--domain", "made-up-domain",
                              "--z", "0", "--X", "1"])
    assert rc == 3


def test_verify_identity_suite_passes(capsys, tmp_path, monkeypatch):
    cfgf = tmp_path / "small.cfg"
    cfgf.write_text("verify.cases = 3\nschedule.levels = 4\n")
    rc, out, _ = run(capsys, ["--config", str(cfgf), "verify", "theorem1",
                              "--domain", "unit-disc"])
    assert rc == 0
    assert out.count("true") == 3 and "false" not in out


def test_json_format_carries_pass_flag(capsys, tmp_path):
    cfgf = tmp_path / "small.cfg"
    cfgf.write_text("verify.cases = 2\nschedule.levels = 5\nformat = json\n")
    rc, out, _ = run(capsys, ["--config", str(cfgf), "verify", "theorem1",
                              "--domain", "unit-disc"])
    assert rc == 0
    doc = json.loads(out)
    assert doc["passed"] is True
    assert len(doc["rows"]) == 2


def test_report_file_output(capsys, tmp_path):
    out_path = tmp_path / "r.csv"
    rc, out, _ = run(capsys, ["lempert", "--z", "0", "--w", "0.5",
                              "--out", str(out_path)])
    assert rc == 0 and out == ""
    text = out_path.read_text()
    assert text.startswith("domain,")
    assert "0.5005" in text


def test_worker_count_does_not_change_bytes(capsys, monkeypatch):
    argv = ["verify", "prop2", "--domain", "polydisc:radii=1,2", "--seed", "4"]
    monkeypatch.setenv("IML_THREADS", "1")
    rc1, out1, _ = run(capsys, argv)
    monkeypatch.setenv("IML_THREADS", "4")
    rc2, out2, _ = run(capsys, argv)
    assert (rc1, out1) == (rc2, out2)
    assert rc1 == 0


def test_example3_subcommand_hop_table(capsys):
    rc, out, _ = run(capsys, ["example3", "--t0", "0", "--t1", "1",
                              "--J", "10", "--K", "50"])
    assert rc == 0
    lines = out.strip().splitlines()
    assert lines[0].startswith("hop,")
    assert len(lines) == 7                      # 5 hops + total + header
    assert lines[-1].endswith("total")


def test_curve_length_subcommand(capsys):
    rc, out, _ = run(capsys, ["curve-length", "--z", "0", "--w", "0.5"])
    assert rc == 0
    assert "distance-oracle" in out and "metric-oracle" in out
    last = out.strip().splitlines()[-1]
    assert float(last.rsplit(",", 1)[1]) == pytest.approx(np.arctanh(0.5), rel=1e-6)


def test_seed_changes_case_sample(capsys, tmp_path):
    cfgf = tmp_path / "small.cfg"
    cfgf.write_text("verify.cases = 2\nschedule.levels = 5\n")
    argv = ["--config", str(cfgf), "verify", "theorem1", "--domain", "unit-disc"]
    _, outa, _ = run(capsys, argv + ["--seed", "1"])
    _, outb, _ = run(capsys, argv + ["--seed", "2"])
    assert outa != outb
