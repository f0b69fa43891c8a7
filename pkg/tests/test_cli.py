"""End-to-end command-line tests through real subprocesses."""

from __future__ import annotations

import json
import os
import subprocess
import sys

import pytest

WINDOW_43 = "sl_n_over_sl_m_x_i:n=4,m=3"


def run_cli(*args: str, env_extra: dict[str, str] | None = None):
    env = os.environ.copy()
    env.update(env_extra or {})
    return subprocess.run(
        [sys.executable, "-m", "properact.cli", *args],
        capture_output=True,
        text=True,
        env=env,
    )


def stderr_payload(proc) -> dict:
    return json.loads(proc.stderr)


@pytest.fixture(scope="module")
def cli_files(tmp_path_factory):
    """Witness and matrix files shared by the command tests."""
    root = tmp_path_factory.mktemp("cli")
    semi = root / "semi.json"
    group = root / "group.json"
    proc = run_cli(
        "construct", "--target", WINDOW_43, "--mode", "semigroup",
        "--seed", "3", "--out", str(semi),
    )
    assert proc.returncode == 0, proc.stderr
    proc = run_cli(
        "construct", "--target", WINDOW_43, "--seed", "0", "--out", str(group)
    )
    assert proc.returncode == 0, proc.stderr

    # Same witness with an angular-radius claim its own words cannot honor.
    shrunk = root / "shrunk.json"
    doc = json.loads(semi.read_text())
    doc["cone"]["angular_radius"] = 1e-6
    shrunk.write_text(json.dumps(doc))

    g = root / "g.json"
    f = root / "f.json"
    fp = root / "fprime.json"
    g.write_text(json.dumps({"matrix": [[2.0, 0, 0], [0, 1.0, 0], [0, 0, 0.5]]}))
    f.write_text(json.dumps([[1.0, 1.0, 0], [0, 1.0, 1.0], [0, 0, 1.0]]))
    fp.write_text(json.dumps([[1.0, 0, 1.0], [0, 1.0, 0], [0, 0, 1.0]]))
    return {
        "root": root,
        "semi": semi,
        "group": group,
        "shrunk": shrunk,
        "g": g,
        "f": f,
        "fprime": fp,
    }


# ---------------------------------------------------------------------------
# decide
# ---------------------------------------------------------------------------


def test_decide_reports_negative_outcome():
    proc = run_cli(
        "decide", "--family", "sl_n_over_sl_m_x_i", "--params", "n=3,m=2"
    )
    assert proc.returncode == 0
    doc = json.loads(proc.stdout)
    assert doc["command"] == "decide"
    assert doc["schema_version"] == "1"
    assert doc["inputs"]["family"] == "sl_n_over_sl_m_x_i"
    assert doc["inputs"]["params"] == {"n": 3, "m": 2}
    assert doc["outcome"]["outcome"] == "OnlyVirtuallyAbelian"
    assert doc["outcome"]["no_compact_quotient"] is True
    assert doc["outcome"]["witness_w"] is not None


def test_decide_reports_positive_orthogonal_case():
    proc = run_cli("decide", "--family", "so_p1q_over_so_pq", "--params", "p=2,q=4")
    assert proc.returncode == 0
    doc = json.loads(proc.stdout)
    assert doc["outcome"]["outcome"] == "ExistsFreeZariskiDense"
    assert doc["outcome"]["witness_w"] is None


def test_decide_rejects_unknown_family():
    proc = run_cli("decide", "--family", "nonsense", "--params", "n=3")
    assert proc.returncode == 2
    payload = stderr_payload(proc)
    assert payload["exit_code"] == 2
    assert "error" in payload and "message" in payload


def test_decide_rejects_malformed_params():
    proc = run_cli(
        "decide", "--family", "sl_n_over_sl_m_x_i", "--params", "n=three,m=2"
    )
    assert proc.returncode == 2


def test_decide_rank_cap_and_environment_override():
    capped = run_cli(
        "decide", "--family", "sl_n_over_sl_p_x_sl_np", "--params", "n=9,p=2"
    )
    assert capped.returncode == 3
    assert stderr_payload(capped)["error"] == "RankCapExceeded"

    raised = run_cli(
        "decide",
        "--family", "sl_n_over_sl_p_x_sl_np",
        "--params", "n=9,p=2",
        env_extra={"PROPERACT_RANK_CAP": "8"},
    )
    assert raised.returncode == 0
    assert json.loads(raised.stdout)["outcome"]["outcome"] == "OnlyVirtuallyAbelian"


# ---------------------------------------------------------------------------
# construct
# ---------------------------------------------------------------------------


def test_construct_same_seed_gives_identical_bytes(cli_files):
    out_a = cli_files["root"] / "repeat_a.json"
    out_b = cli_files["root"] / "repeat_b.json"
    for out in (out_a, out_b):
        proc = run_cli(
            "construct", "--target", WINDOW_43, "--mode", "semigroup",
            "--seed", "3", "--out", str(out),
        )
        assert proc.returncode == 0
        assert "decision: ExistsFreeZariskiDense" in proc.stdout
    assert out_a.read_bytes() == out_b.read_bytes()
    assert out_a.read_bytes() == cli_files["semi"].read_bytes()


def test_construct_json_report(cli_files):
    out = cli_files["root"] / "json_report.json"
    proc = run_cli(
        "construct", "--target", WINDOW_43, "--seed", "0",
        "--out", str(out), "--json",
    )
    assert proc.returncode == 0
    doc = json.loads(proc.stdout)
    assert doc["command"] == "construct"
    assert doc["outcome"]["power_m"] == 2
    assert doc["outcome"]["decision"]["outcome"] == "ExistsFreeZariskiDense"
    assert set(doc["outcome"]["stage_seconds"]) == {
        "decide", "cone", "generators", "powering",
    }
    saved = json.loads(out.read_text())
    assert saved["schema_version"] == "1"
    assert saved["mode"] == "group"


def test_construct_refuses_negative_target(cli_files):
    proc = run_cli(
        "construct", "--target", "sl_n_over_sl_m_x_i:n=3,m=2",
        "--out", str(cli_files["root"] / "never.json"),
    )
    assert proc.returncode == 4
    assert stderr_payload(proc)["error"] == "PreconditionFailed"


def test_construct_refuses_orthogonal_forms(cli_files):
    proc = run_cli(
        "construct", "--target", "so_p1q_over_so_pq:p=2,q=4",
        "--out", str(cli_files["root"] / "never.json"),
    )
    assert proc.returncode == 2
    assert stderr_payload(proc)["error"] == "UnsupportedFamily"


def test_construct_checks_dimension_flag(cli_files):
    proc = run_cli(
        "construct", "--target", WINDOW_43, "--n", "5",
        "--out", str(cli_files["root"] / "never.json"),
    )
    assert proc.returncode == 2


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------


def test_verify_semigroup_witness_passes(cli_files):
    proc = run_cli(
        "verify", "--witness", str(cli_files["semi"]),
        "--margin", WINDOW_43, "--max-len", "4",
    )
    assert proc.returncode == 0
    assert "n/a  (group-mode check)" in proc.stdout  # freeness is one-sided
    assert "cone membership pass" in proc.stdout
    assert "additivity      pass" in proc.stdout
    assert "words per length: L1=2, L2=4" in proc.stdout


def test_verify_json_report(cli_files):
    proc = run_cli(
        "verify", "--witness", str(cli_files["semi"]), "--max-len", "2", "--json"
    )
    assert proc.returncode == 0
    doc = json.loads(proc.stdout)
    assert doc["outcome"]["word_ball"]["word_count"] == 6
    assert doc["outcome"]["witness"]["schema_version"] == "1"
    assert set(doc["outcome"]["empirical_constants"]) == {"m_box", "ln_c_emp"}


def test_verify_group_witness_names_offending_word(cli_files):
    proc = run_cli(
        "verify", "--witness", str(cli_files["group"]), "--margin", WINDOW_43
    )
    assert proc.returncode == 6
    payload = stderr_payload(proc)
    assert payload["error"] == "FreenessFailure"
    assert isinstance(payload["word"], list) and payload["word"]
    assert all(isinstance(v, int) for v in payload["word"])


def test_verify_catches_unsupportable_radius_claim(cli_files):
    proc = run_cli("verify", "--witness", str(cli_files["shrunk"]))
    assert proc.returncode == 6
    payload = stderr_payload(proc)
    assert payload["error"] == "ConeEscape"
    assert payload["word"]


def test_verify_thread_count_guard(cli_files):
    proc = run_cli(
        "verify", "--witness", str(cli_files["semi"]), "--threads", "0"
    )
    assert proc.returncode == 2


# ---------------------------------------------------------------------------
# probe
# ---------------------------------------------------------------------------


def test_probe_growth_json(cli_files):
    proc = run_cli(
        "probe", "growth",
        "--g", str(cli_files["g"]), "--f", str(cli_files["f"]),
        "--fprime", str(cli_files["fprime"]), "--pmax", "5", "--json",
    )
    assert proc.returncode == 0
    out = json.loads(proc.stdout)["outcome"]
    assert len(out["diffs"]) == 5
    assert out["sup_diff"] == max(out["diffs"]) > 0.0
    assert len(out["mu_f_final"]) == 3


def test_probe_growth_power_guard(cli_files):
    proc = run_cli(
        "probe", "growth",
        "--g", str(cli_files["g"]), "--f", str(cli_files["f"]), "--pmax", "61",
    )
    assert proc.returncode == 7
    assert stderr_payload(proc)["error"] == "OverflowRisk"


def test_probe_census_counts(cli_files):
    # exp(12) sits between the length-2 and length-3 projection norms.
    proc = run_cli(
        "probe", "census", "--witness", str(cli_files["semi"]),
        "--radius", "162754", "--margin", WINDOW_43, "--max-len", "3", "--json",
    )
    assert proc.returncode == 0
    out = json.loads(proc.stdout)["outcome"]
    assert out["per_length"] == [1, 2, 4, 0]
    assert out["count"] == 7


# ---------------------------------------------------------------------------
# catalog
# ---------------------------------------------------------------------------


def test_catalog_lists_every_family():
    proc = run_cli("catalog", "--json")
    assert proc.returncode == 0
    families = json.loads(proc.stdout)["outcome"]["families"]
    assert [f["family"] for f in families] == [
        "sl_n_over_sl_p_x_sl_np",
        "sl_n_over_sl_m_x_i",
        "sl_2m_over_sp",
        "sl_n_over_so_pq",
        "so_p1q_over_so_pq",
    ]
    allowed = {
        "ExistsFreeZariskiDense",
        "OnlyVirtuallyAbelian",
        "NoInfiniteDiscrete",
    }
    for fam in families:
        assert fam["description"]
        assert fam["param_names"]
        assert fam["cases"]
        assert {c["outcome"] for c in fam["cases"]} <= allowed


def test_catalog_human_lines():
    proc = run_cli("catalog")
    assert proc.returncode == 0
    lines = [l for l in proc.stdout.splitlines() if l.strip()]
    assert lines and all(" -> " in l for l in lines)
