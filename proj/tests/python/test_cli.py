"""End-to-end checks of the command-line front end."""

import json
import os
import subprocess

import pytest

CLI = os.environ.get("LAMA_CLI")

pytestmark = pytest.mark.skipif(CLI is None, reason="LAMA_CLI not set")


def run(*args, check=True):
    proc = subprocess.run([CLI, *args], capture_output=True, text=True)
    if check and proc.returncode != 0:
        raise AssertionError(f"{args} failed rc={proc.returncode}: {proc.stderr}")
    return proc


def parse_csv(text):
    meta, header, rows = {}, None, []
    for line in text.splitlines():
        if line.startswith("# "):
            k, _, v = line[2:].partition("=")
            meta[k] = v
        elif header is None:
            header = line.split(",")
        elif line:
            rows.append(dict(zip(header, line.split(","))))
    return meta, rows


def test_thresholds_qpsk_values():
    proc = run("thresholds", "--constellations", "qpsk")
    meta, rows = parse_csv(proc.stdout)
    assert meta["command"] == "thresholds"
    assert len(rows) == 1
    row = rows[0]
    assert row["constellation"] == "QPSK"
    assert abs(float(row["beta_min"]) - 1.4752) < 5e-3
    assert abs(float(row["beta_max"]) - 2.0854) < 5e-3
    assert abs(float(row["n0_min"]) - 0.150) < 0.003
    assert abs(float(row["n0_max"]) - 0.122) < 0.003


def test_thresholds_empty_list_is_usage_error():
    proc = run("thresholds", "--constellations", "", check=False)
    assert proc.returncode == 2


def test_unknown_constellation_is_usage_error():
    proc = run("thresholds", "--constellations", "zzpsk", check=False)
    assert proc.returncode == 2


def test_se_trace_matched_columns_agree():
    proc = run("se", "--constellation", "qpsk", "--beta", "1e-12", "--n0", "0.25",
               "--iters", "5")
    meta, rows = parse_csv(proc.stdout)
    assert meta["matched"] == "true"
    for row in rows[1:]:
        assert abs(float(row["sigma2"]) - 0.25) < 1e-10
        assert row["sigma2"] == row["gamma2"]


def test_se_mismatch_tracks_both_variances():
    proc = run("se", "--constellation", "qpsk", "--beta", "0.5", "--n0", "0.1",
               "--n0post", "0.3", "--iters", "6")
    meta, rows = parse_csv(proc.stdout)
    assert meta["matched"] == "false"
    assert any(row["sigma2"] != row["gamma2"] for row in rows[1:])


def test_emit_g_has_three_sign_changes_in_the_conditional_band():
    proc = run("se", "--constellation", "qpsk", "--beta", "1.7803", "--n0", "0.11",
               "--emit-g", "--g-points", "500")
    _, rows = parse_csv(proc.stdout)
    vals = [float(r["g"]) for r in rows]
    changes = sum(1 for a, b in zip(vals, vals[1:]) if (a < 0) != (b < 0))
    assert changes == 3


def test_fixed_points_counts():
    proc = run("fixed-points", "--constellation", "qpsk", "--beta", "0.5", "--n0", "0.1")
    meta, rows = parse_csv(proc.stdout)
    assert meta["count"] == "1"
    assert len(rows) == 1


def test_tradeoff_rows_and_unreachable_floor():
    proc = run("tradeoff", "--constellation", "qpsk", "--betas", "0.1,2.0854",
               "--target-ser", "1e-3", "--max-iters", "4")
    _, rows = parse_csv(proc.stdout)
    lo = [r for r in rows if float(r["beta"]) == 0.1]
    hi = [r for r in rows if float(r["beta"]) > 2.0]
    assert lo and not hi  # the ERT column floors above the target: absent rows
    gap = float(lo[-1]["required_snr_db"]) - float(lo[-1]["awgn_snr_db"])
    assert gap < 0.1


def test_rate_limits():
    proc = run("rate", "--constellation", "qpsk", "--betas", "0.1", "--snr-db", "30,40")
    _, rows = parse_csv(proc.stdout)
    assert float(rows[-1]["rate_bpcu"]) > 1.99


def test_simulate_roundtrip_and_reproducibility(tmp_path):
    cfg = tmp_path / "sim.cfg"
    cfg.write_text(
        "[simulate]\n"
        "mr = 32\nmt = 16\nconstellation = qpsk\nsnr_db = 8,12\n"
        "trials = 25\nmax_iters = 6\nseed = 11\ndetectors = lama,mf\n"
    )
    a = run("simulate", str(cfg))
    b = run("simulate", str(cfg))
    assert a.stdout == b.stdout  # bit-identical reruns

    meta, rows = parse_csv(a.stdout)
    assert meta["seed"] == "11"
    assert {r["detector"] for r in rows} == {"lama", "mf"}
    for r in rows:
        assert 0.0 <= float(r["ser"]) <= 1.0

    j = run("simulate", str(cfg), "--format", "json")
    doc = json.loads(j.stdout)
    assert doc["config"]["constellation"] == "QPSK"
    assert doc["columns"][0] == "detector"


def test_simulate_validation_errors(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("[simulate]\nmr = 8\nmt = 4\nsnr_db = 10\ntrials = 0\n")
    proc = run("simulate", str(bad), check=False)
    assert proc.returncode == 2

    unknown = tmp_path / "unknown.cfg"
    unknown.write_text("[simulate]\nsnr_db = 10\nwhatever = 3\n")
    proc = run("simulate", str(unknown), check=False)
    assert proc.returncode == 2
    assert "unknown key" in proc.stderr


def test_constellations_dump_custom_file():
    path = os.path.join(os.environ["LAMA_TEST_DATA"], "three_point.txt")
    proc = run("constellations", "--constellation", f"file:{path}")
    meta, rows = parse_csv(proc.stdout)
    assert len(rows) == 3
    assert abs(sum(float(r["prior"]) for r in rows) - 1.0) < 1e-12


def test_output_file_and_seed_echo(tmp_path):
    out = tmp_path / "t.csv"
    run("thresholds", "--constellations", "16qam", "--out", str(out))
    text = out.read_text()
    assert "16-QAM" in text
    meta, rows = parse_csv(text)
    assert abs(float(rows[0]["beta_min"]) - 0.983) < 5e-3
