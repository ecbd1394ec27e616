"""Command-line surface: formats, exit codes, config files, determinism."""

import json
import math

import numpy as np
import pytest

from drkernels import cli
from drkernels.geometry import space_params
from drkernels.kernels import kernel_grid


def _rows(out):
    lines = [l for l in out.strip().splitlines() if l and not l.startswith("#")]
    return [l.split(",") for l in lines]


def test_kernel_row_even(capsys):
    rc = cli.main(["kernel", "--m", "2", "--k", "0", "--tau-re", "1",
                   "--tau-im", "0", "--r", "1"])
    assert rc == 0
    header, row = _rows(capsys.readouterr().out)
    assert header == ["r", "tau_re", "tau_im", "re", "im", "abs", "method",
                      "quad_err"]
    assert row[6] == "even-closed-form"
    assert float(row[3]) == pytest.approx(0.16417259794154998, rel=1e-15)
    assert float(row[7]) == 0.0


def test_kernel_row_odd(capsys):
    rc = cli.main(["kernel", "--space", "HEIS", "--tau-re", "1",
                   "--tau-im", "0.5", "--r", "2"])
    assert rc == 0
    _, row = _rows(capsys.readouterr().out)
    assert row[6] == "odd-quadrature"
    assert 0.0 <= float(row[7]) < 1e-8


def test_unknown_flag_exits_2():
    with pytest.raises(SystemExit) as info:
        cli.main(["kernel", "--m", "2", "--k", "0", "--tau-re", "1",
                  "--tau-im", "0", "--r", "1", "--frobnicate"])
    assert info.value.code == 2


def test_unknown_subcommand_exits_2():
    with pytest.raises(SystemExit) as info:
        cli.main(["transmogrify"])
    assert info.value.code == 2


def test_odd_m_exits_2(capsys):
    with pytest.raises(SystemExit) as info:
        cli.main(["kernel", "--m", "3", "--k", "0", "--tau-re", "1",
                  "--tau-im", "0", "--r", "1"])
    assert info.value.code == 2
    assert "even" in capsys.readouterr().err


def test_zero_tau_usage_error(capsys):
    rc = cli.main(["kernel", "--m", "2", "--k", "0", "--tau-re", "0",
                   "--tau-im", "0", "--r", "1"])
    assert rc == 2
    assert capsys.readouterr().err.startswith("error:")


def test_numeric_failure_json(capsys):
    rc = cli.main(["kernel", "--m", "2", "--k", "0", "--tau-re", "-1",
                   "--tau-im", "0", "--r", "1"])
    assert rc == 1
    payload = json.loads(capsys.readouterr().err)
    assert payload["schema_version"] == "1"
    assert payload["error"] == "ValueError"


def test_config_round_trip(tmp_path):
    cfg = cli.RunConfig(m=4, k=3, quad_tol=1.2345678901234567e-10,
                        r_min=0.25, r_max=12.5, r_steps=17, threads=2)
    path = tmp_path / "run.cfg"
    cfg.to_file(path)
    back = cli.RunConfig.from_file(path)
    assert back == cfg


def test_config_dump_reparses(tmp_path, capsys):
    cfg = cli.RunConfig(m=2, k=1, s_max=6.5, fit_tol=3e-7)
    src = tmp_path / "in.cfg"
    cfg.to_file(src)
    rc = cli.main(["config-dump", "--config", str(src)])
    assert rc == 0
    dumped = tmp_path / "out.cfg"
    dumped.write_text(capsys.readouterr().out)
    assert cli.RunConfig.from_file(dumped) == cfg


def test_config_rejects_unknown_key(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("[space]\nm = 2\nk = 0\nwibble = 3\n")
    with pytest.raises(ValueError):
        cli.RunConfig.from_file(path)


def test_flags_override_config(tmp_path, capsys):
    cfg = cli.RunConfig(m=2, k=1)
    path = tmp_path / "run.cfg"
    cfg.to_file(path)
    rc = cli.main(["kernel", "--config", str(path), "--k", "0",
                   "--tau-re", "1", "--tau-im", "0", "--r", "1"])
    assert rc == 0
    _, row = _rows(capsys.readouterr().out)
    assert row[6] == "even-closed-form"


def test_kernel_grid_values_parse_back_exactly(tmp_path, capsys):
    taus = tmp_path / "taus.txt"
    taus.write_text("0.7 0\n0.5 0.5\n")
    rc = cli.main(["kernel-grid", "--m", "2", "--k", "0",
                   "--tau-list", str(taus), "--r-min", "0.5",
                   "--r-max", "4.0", "--r-steps", "5"])
    assert rc == 0
    rows = _rows(capsys.readouterr().out)[1:]
    assert len(rows) == 10
    p = space_params(2, 0)
    r = np.linspace(0.5, 4.0, 5)
    want, _ = kernel_grid(p, 0.5 + 0.5j, r)
    got = [complex(float(row[3]), float(row[4])) for row in rows[5:]]
    # 17 significant digits survive the text round trip bit-for-bit
    assert all(g == w for g, w in zip(got, want))


def test_kernel_grid_thread_count_invariance(tmp_path):
    taus = tmp_path / "taus.txt"
    taus.write_text("1.0 0\n0.5 0.5\n0.25 0\n")
    outs = []
    for threads in ("1", "3"):
        out = tmp_path / f"grid_{threads}.csv"
        rc = cli.main(["kernel-grid", "--space", "RH3",
                       "--tau-list", str(taus), "--out", str(out),
                       "--threads", threads])
        assert rc == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_phi_csv(capsys):
    rc = cli.main(["phi", "--m", "2", "--k", "1", "--s", "1.2",
                   "--r-max", "5", "--r-steps", "11"])
    assert rc == 0
    rows = _rows(capsys.readouterr().out)
    assert rows[0] == ["r", "phi"]
    assert len(rows) == 12
    assert float(rows[1][1]) == pytest.approx(1.0, abs=1e-12)


def test_plancherel_csv(capsys):
    rc = cli.main(["plancherel", "--m", "2", "--k", "0", "--s-min", "0.5",
                   "--s-max", "2.0", "--steps", "4"])
    assert rc == 0
    rows = _rows(capsys.readouterr().out)[1:]
    for row in rows:
        s, dens, resid = map(float, row)
        assert dens == pytest.approx(4.0 * s * s, rel=1e-8)
        assert resid < 1e-8


def test_verify_lower_json(capsys):
    rc = cli.main(["verify", "lower", "--m", "2", "--k", "0",
                   "--t-list", "0.5,1.0", "--grid", "0:20:32"])
    assert rc == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["schema_version"] == "1"
    assert payload["kind"] == "lower" and payload["valid"] is True


def test_decay_footer(capsys):
    rc = cli.main(["decay", "--m", "2", "--k", "0", "--q", "4",
                   "--regime", "large", "--t-min", "30", "--t-max", "120"])
    assert rc == 0
    out = capsys.readouterr().out
    rows = _rows(out)
    assert rows[0] == ["t", "norm"]
    footer = [l for l in out.splitlines() if l.startswith("#")]
    assert len(footer) == 1
    slope = float(footer[0].split("slope=")[1].split()[0])
    assert abs(slope + 1.5) < 0.3


def test_strichartz_json(tmp_path, capsys):
    grids = tmp_path / "grids.cfg"
    grids.write_text("[grids]\nt_steps = 5\n")
    rc = cli.main(["strichartz", "--m", "2", "--k", "0", "--p", "inf",
                   "--q", "2", "--window", "0:1", "--config", str(grids)])
    assert rc == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["p"] is None and payload["q"] == 2.0
    assert payload["admissible"] is True
    assert payload["ratio"] == pytest.approx(1.0, abs=1e-3)


def test_propagate_csv(capsys):
    rc = cli.main(["propagate", "--space", "RH3", "--data", "gaussian:1.0",
                   "--t-max", "0.5", "--t-steps", "3", "--r-max", "30",
                   "--r-points", "20"])
    assert rc == 0
    rows = _rows(capsys.readouterr().out)
    assert rows[0] == ["t", "r", "re", "im"]
    body = rows[1:]
    times = sorted({float(row[0]) for row in body})
    assert times == [0.0, 0.25, 0.5]
    # the t = 0 slice reproduces the data
    for row in body:
        t, r, re, im = map(float, row)
        if t == 0.0 and 0.5 < r < 3.0:
            assert re == pytest.approx(math.exp(-0.5 * r * r), rel=1e-5)
            assert abs(im) < 1e-8


def test_decay_q_validation(capsys):
    rc = cli.main(["decay", "--m", "2", "--k", "0", "--q", "2",
                   "--regime", "large"])
    assert rc == 2
    assert "q must exceed 2" in capsys.readouterr().err
