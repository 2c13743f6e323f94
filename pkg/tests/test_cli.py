"""End-to-end tests of the command-line interface.

Everything runs through ``main(argv)`` in-process; stdout still goes through
the normal emit path, so byte-level determinism checks are meaningful.
"""

import json
import subprocess
import sys

import pytest

from uasim.cli import main
from uasim.formulas import effective_rates
from uasim.ftregion import load_synthetic_curve


@pytest.fixture
def run(capsys):
    def _run(*argv):
        code = main(list(argv))
        captured = capsys.readouterr()
        return code, captured.out, captured.err

    return _run


# ---------------------------------------------------------------------------
# analytic
# ---------------------------------------------------------------------------


def test_analytic_golden_row(run):
    code, out, _ = run(
        "analytic", "--formula", "ps-single", "--nu", "0.01", "--big-n", "4",
        "--variant", "main",
    )
    assert code == 0
    assert out == "nu,N,value,variant\n0.01,4,0.97783749999999992,main\n"


def test_analytic_emits_every_variant_by_default(run):
    code, out, _ = run("analytic", "--formula", "ps-type2", "--nu", "0.01", "--big-n", "2")
    assert code == 0
    variants = [line.rsplit(",", 1)[1] for line in out.splitlines()[1:]]
    assert variants == ["main", "alt"]


def test_analytic_empty_grid_is_header_only(run):
    code, out, _ = run("analytic", "--formula", "ps-single")
    assert code == 0
    assert out == "nu,N,value,variant\n"


def test_analytic_handles_infinite_copies(run):
    code, out, _ = run(
        "analytic", "--formula", "fidelity-first-order", "--nu", "0.03", "--big-n", "inf",
    )
    assert code == 0
    assert out.splitlines()[1] == "0.029999999999999999,inf,1,"


def test_analytic_json_format(run):
    code, out, _ = run(
        "analytic", "--formula", "ps-four-mode", "--nu", "0.005", "--big-n", "8",
        "--format", "json",
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["columns"] == ["nu", "N", "value", "variant"]
    assert payload["rows"][0]["value"] == pytest.approx(0.97419296875)


@pytest.mark.parametrize(
    "argv",
    [
        ("analytic", "--formula", "nope", "--nu", "0.01", "--big-n", "2"),
        ("analytic", "--formula", "ps-single", "--variant", "bogus", "--nu", "0.01", "--big-n", "2"),
        ("analytic", "--formula", "ps-four-mode", "--variant", "main", "--nu", "0.01", "--big-n", "2"),
        ("analytic", "--formula", "ps-single", "--nu", "abc", "--big-n", "2"),
        ("analytic", "--formula", "ps-single", "--nu", "0.01", "--big-n", "0"),
    ],
)
def test_analytic_usage_errors(run, argv):
    code, _, err = run(*argv)
    assert code == 2
    assert err.startswith("uasim:")


# ---------------------------------------------------------------------------
# mc
# ---------------------------------------------------------------------------


def test_mc_requires_seed(run):
    code, _, err = run("mc", "--nu", "0.01", "--big-n", "2", "--samples", "100")
    assert code == 2
    assert "--seed" in err


def test_mc_stdout_is_deterministic(run):
    argv = ("mc", "--nu", "0.01", "--big-n", "2", "--samples", "2000", "--seed", "7")
    _, first, _ = run(*argv)
    _, second, _ = run(*argv)
    assert first == second
    assert first.splitlines()[0] == (
        "nu,N,samples,mc_mean,mc_stderr,mc_fidelity,mc_fidelity_stderr,"
        "main,second_order,fourth_order"
    )


def test_mc_noiseless_run_is_exact(run):
    _, out, _ = run(
        "mc", "--nu", "0", "--big-n", "4", "--samples", "100", "--seed", "1"
    )
    row = out.splitlines()[1].split(",")
    assert [float(v) for v in row[3:6]] == [1.0, 0.0, 1.0]
    # the delta-method fidelity variance leaves sub-1e-100 rounding dust
    assert 0.0 <= float(row[6]) < 1e-100


def test_mc_seed_changes_the_estimate(run):
    argv = ("mc", "--nu", "0.01", "--big-n", "2", "--samples", "2000")
    _, a, _ = run(*argv, "--seed", "7")
    _, b, _ = run(*argv, "--seed", "8")
    assert a != b


def test_mc_discrimination_comment_and_report(run, tmp_path):
    report_path = tmp_path / "report.json"
    code, out, _ = run(
        "mc", "--nu", "0.005,0.01,0.02", "--big-n", "2", "--samples", "2000",
        "--seed", "3", "--report", str(report_path),
    )
    assert code == 0
    assert "# selected_variant: " in out
    report = json.loads(report_path.read_text())
    assert set(report["chi_square"]) == {"main", "second-order", "fourth-order"}
    assert report["selected"] in report["chi_square"]
    assert len(report["points"]) == 3


def test_mc_report_needs_enough_points(run, tmp_path):
    code, _, err = run(
        "mc", "--nu", "0.01", "--big-n", "2", "--samples", "2000",
        "--seed", "3", "--report", str(tmp_path / "r.json"),
    )
    assert code == 2
    assert "three" in err


def test_mc_fusion_families(run):
    for family in ("type2", "four-mode"):
        code, out, _ = run(
            "mc", "--family", family, "--nu", "0.01", "--big-n", "1",
            "--samples", "500", "--seed", "5",
        )
        assert code == 0
        header = out.splitlines()[0]
        assert "mc_pair_mean" in header
        # single unitary copy: success is certain up to rounding
        first = out.splitlines()[1].split(",")
        assert float(first[3]) == pytest.approx(1.0, abs=1e-12)


def test_mc_rejects_non_power_of_two(run):
    code, _, err = run("mc", "--nu", "0.01", "--big-n", "3", "--samples", "100", "--seed", "1")
    assert code == 2
    assert "power of two" in err


# ---------------------------------------------------------------------------
# encode-check
# ---------------------------------------------------------------------------


def test_encode_check_reports_quadratic_slope(run):
    code, out, _ = run(
        "encode-check", "--levels", "1,2", "--delta-theta", "1e-3,1e-4",
        "--seed", "5",
    )
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "levels,N,delta_theta,deviation,slope"
    slopes = {float(line.split(",")[-1]) for line in lines[1:]}
    assert all(abs(s - 2.0) < 0.05 for s in slopes)


def test_encode_check_validates_levels(run):
    code, _, err = run(
        "encode-check", "--levels", "9", "--delta-theta", "1e-3,1e-4", "--seed", "5",
    )
    assert code == 2
    assert "between 1 and 6" in err


def test_encode_check_needs_two_offsets(run):
    code, _, _ = run("encode-check", "--levels", "1", "--delta-theta", "1e-3", "--seed", "5")
    assert code == 2


# ---------------------------------------------------------------------------
# parity
# ---------------------------------------------------------------------------


def test_parity_golden_rows(run):
    code, out, _ = run("parity", "--n", "2", "--q", "2", "--p", "0,0.1")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "n,q,p,success_prob"
    assert lines[1] == "2,2,0,1"
    assert lines[2].startswith("2,2,0.1")
    assert float(lines[2].split(",")[-1]) == pytest.approx(0.9477)


def test_parity_rejects_bad_rate(run):
    code, _, err = run("parity", "--n", "2", "--q", "2", "--p", "1.5")
    assert code == 2
    assert "[0, 1]" in err


# ---------------------------------------------------------------------------
# ft-region
# ---------------------------------------------------------------------------


def test_ft_region_default_curve_and_comment(run):
    code, out, _ = run(
        "ft-region", "--epsilon", "5e-3", "--gamma", "9e-3", "--big-n", "1,2",
    )
    assert code == 0
    assert out.splitlines()[0] == (
        "epsilon,gamma,N,effective_error,effective_loss,fault_tolerant"
    )
    assert "# curve: synthetic-demo" in out


def test_ft_region_single_copy_matches_raw_membership(run):
    curve = load_synthetic_curve()
    points = [(1e-4, 1e-2), (1e-4, 2e-2), (5e-3, 8e-3), (5e-3, 1e-2)]
    # run one gamma at a time so each (eps, gamma) pair appears once
    for eps, gam in points:
        code, out, _ = run(
            "ft-region", "--epsilon", str(eps), "--gamma", str(gam), "--big-n", "1",
        )
        assert code == 0
        verdict = out.splitlines()[1].split(",")[-1] == "true"
        limit = curve.gamma_at(eps)
        assert verdict == (limit is not None and gam <= limit)
        # and N = 1 leaves the rates untouched
        err, loss = effective_rates(eps, gam, 1)
        assert (err, loss) == (eps, gam)


def test_ft_region_rejects_malformed_curve(run, tmp_path):
    bad = tmp_path / "curve.csv"
    bad.write_text("epsilon,gamma\n1e-4,0.01\n")
    code, _, err = run(
        "ft-region", "--curve", str(bad), "--epsilon", "1e-3", "--gamma", "1e-3",
        "--big-n", "1",
    )
    assert code == 3
    assert "# code:" in err


def test_ft_region_missing_curve_file(run):
    code, _, _ = run(
        "ft-region", "--curve", "/nonexistent.csv", "--epsilon", "1e-3",
        "--gamma", "1e-3", "--big-n", "1",
    )
    assert code == 3


# ---------------------------------------------------------------------------
# config round trips and output plumbing
# ---------------------------------------------------------------------------


def test_dump_config_rerun_is_byte_identical(run, tmp_path):
    cfg = tmp_path / "cfg.json"
    out_a = tmp_path / "a.csv"
    out_b = tmp_path / "b.csv"
    code, _, _ = run(
        "mc", "--nu", "0.01", "--big-n", "2", "--samples", "2000", "--seed", "7",
        "--dump-config", str(cfg), "--out", str(out_a),
    )
    assert code == 0
    # the dump must not contain its own destination
    stored = json.loads(cfg.read_text())
    assert "dump_config" not in stored
    assert stored["subcommand"] == "mc"

    code, _, _ = run("mc", "--config", str(cfg), "--out", str(out_b))
    assert code == 0
    assert out_a.read_bytes() == out_b.read_bytes()


def test_cli_flags_override_config(run, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({
        "subcommand": "analytic", "formula": "ps-single",
        "nu": ["0.01"], "big_n": ["2"], "variant": "main",
    }))
    code, out, _ = run("analytic", "--config", str(cfg), "--nu", "0.02")
    assert code == 0
    assert out.splitlines()[1].startswith("0.02,2,")


def test_config_for_wrong_subcommand(run, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"subcommand": "parity", "n": 2, "q": 2, "p": ["0.1"]}))
    code, _, err = run("analytic", "--config", str(cfg))
    assert code == 2
    assert "subcommand" in err


def test_malformed_config_is_an_input_error(run, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text("{not json")
    code, _, _ = run("analytic", "--config", str(cfg))
    assert code == 3
    code, _, _ = run("analytic", "--config", str(tmp_path / "missing.json"))
    assert code == 3


def test_out_file_and_svg(run, tmp_path):
    out = tmp_path / "table.csv"
    svg = tmp_path / "plot.svg"
    code, stdout, _ = run(
        "analytic", "--formula", "ps-single", "--nu", "0.005,0.01", "--big-n", "2,4",
        "--out", str(out), "--svg", str(svg),
    )
    assert code == 0
    assert stdout == ""  # table went to the file
    assert out.read_text().startswith("nu,N,value,variant\n")
    body = svg.read_text()
    assert body.startswith("<svg ") and body.rstrip().endswith("</svg>")

    # SVG output is deterministic too
    svg2 = tmp_path / "plot2.svg"
    run(
        "analytic", "--formula", "ps-single", "--nu", "0.005,0.01", "--big-n", "2,4",
        "--svg", str(svg2),
    )
    assert svg.read_bytes() == svg2.read_bytes()


def test_unwritable_out_is_an_internal_error(run, tmp_path):
    code, _, err = run(
        "analytic", "--formula", "ps-single", "--nu", "0.01", "--big-n", "2",
        "--out", str(tmp_path / "no" / "such" / "dir.csv"),
    )
    assert code == 4
    assert "internal error" in err


def test_console_entry_point_runs():
    proc = subprocess.run(
        [sys.executable, "-m", "uasim.cli", "parity", "--n", "2", "--q", "2", "--p", "0.1"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert proc.stdout.startswith("n,q,p,success_prob\n")
