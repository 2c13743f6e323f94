"""Threshold-curve handling and fault-tolerance verdicts."""

import io
import math

import pytest

from uasim.formulas import effective_rates
from uasim.ftregion import (
    CurveFormatError,
    RegionQuery,
    SweepPoint,
    ThresholdCurve,
    best_n,
    is_fault_tolerant,
    load_synthetic_curve,
    sweep_region,
    write_sweep_csv,
)

# A flat curve makes verdicts easy to reason about by hand.
FLAT = ThresholdCurve("flat", (1e-4, 1e-2), (0.01, 0.01))


def curve_text(body):
    return "# code: demo\nepsilon,gamma\n" + body


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------


def test_from_csv_roundtrip():
    c = ThresholdCurve.from_csv(io.StringIO(curve_text("1e-4,0.02\n1e-3,0.01\n")))
    assert c.code_name == "demo"
    assert c.epsilons == (1e-4, 1e-3)
    assert c.gammas == (0.02, 0.01)


def test_from_csv_accepts_comments_and_blank_lines():
    text = "# a note\n\n# code: demo\nepsilon,gamma\n# midway comment\n1e-4,0.02\n1e-3,0.01\n"
    c = ThresholdCurve.from_csv(io.StringIO(text))
    assert c.code_name == "demo"


@pytest.mark.parametrize(
    "text, fragment",
    [
        ("epsilon,gamma\n1e-4,0.02\n1e-3,0.01\n", "# code:"),
        ("# code: demo\neps,gam\n1e-4,0.02\n", ":2: expected header"),
        (curve_text("1e-4,0.02,9\n"), ":3: expected two columns"),
        (curve_text("1e-4,abc\n"), ":3: non-numeric"),
        (curve_text("1e-4,0.02\n"), "at least two"),
        (curve_text("1e-3,0.02\n1e-4,0.01\n"), "increase strictly"),
        (curve_text("1e-4,0.01\n1e-3,0.02\n"), "non-increasing"),
        (curve_text("1e-4,0.02\n2.0,0.01\n"), "outside (0, 1)"),
    ],
)
def test_from_csv_rejects_malformed_input(text, fragment):
    with pytest.raises(CurveFormatError) as err:
        ThresholdCurve.from_csv(io.StringIO(text))
    assert fragment in str(err.value)


def test_from_csv_missing_file():
    with pytest.raises(CurveFormatError, match="cannot read"):
        ThresholdCurve.from_csv("/nonexistent/curve.csv")


def test_shipped_curve_loads():
    c = load_synthetic_curve()
    assert c.code_name == "synthetic-demo"
    assert len(c.epsilons) >= 5


# ---------------------------------------------------------------------------
# interpolation
# ---------------------------------------------------------------------------


def test_gamma_at_hits_the_knots():
    c = ThresholdCurve("demo", (1e-4, 1e-3, 1e-2), (0.02, 0.01, 0.005))
    assert c.gamma_at(1e-4) == pytest.approx(0.02)
    assert c.gamma_at(1e-3) == pytest.approx(0.01)
    assert c.gamma_at(1e-2) == pytest.approx(0.005)


def test_gamma_at_interpolates_log_log():
    c = ThresholdCurve("demo", (1e-4, 1e-2), (0.02, 0.005))
    # halfway in log epsilon lands halfway in log gamma
    assert c.gamma_at(1e-3) == pytest.approx(math.sqrt(0.02 * 0.005))


def test_gamma_at_refuses_extrapolation():
    c = ThresholdCurve("demo", (1e-4, 1e-2), (0.02, 0.005))
    assert c.gamma_at(5e-5) is None
    assert c.gamma_at(2e-2) is None
    assert c.gamma_at(0.0) is None


def test_densified_leaves_the_interpolant_invariant():
    c = load_synthetic_curve()
    d = c.densified().densified()
    assert len(d.epsilons) == 4 * (len(c.epsilons) - 1) + 1
    for eps in (2e-6, 1e-4, 7e-4, 5e-3, 2.9e-2):
        assert d.gamma_at(eps) == pytest.approx(c.gamma_at(eps), rel=1e-12)


# ---------------------------------------------------------------------------
# verdicts
# ---------------------------------------------------------------------------


def test_query_validation():
    with pytest.raises(ValueError):
        RegionQuery(-1e-3, 1e-3, 2)
    with pytest.raises(ValueError):
        RegionQuery(1e-3, 1e-3, 3)


def test_single_copy_verdict_is_raw_curve_membership():
    """N = 1 changes nothing, so the verdict is just gamma <= curve(epsilon)."""
    for eps, gam in [(5e-3, 9e-3), (5e-3, 1.1e-2), (2e-4, 1e-2), (2e-2, 1e-3)]:
        inside = FLAT.gamma_at(eps) is not None and gam <= FLAT.gamma_at(eps)
        assert is_fault_tolerant(RegionQuery(eps, gam, 1), FLAT) == inside


def test_averaging_trades_error_for_loss():
    """A frozen worked example on the flat curve.

    At (5e-3, 9e-3): N = 1 passes (9e-3 <= 0.01).  N = 2 moves the loss to
    9e-3 * 5/3 + 5e-3/2 = 0.0175 > 0.01, so averaging breaks it.
    """
    assert is_fault_tolerant(RegionQuery(5e-3, 9e-3, 1), FLAT)
    err, loss = effective_rates(5e-3, 9e-3, 2)
    assert loss == pytest.approx(0.0175)
    assert not is_fault_tolerant(RegionQuery(5e-3, 9e-3, 2), FLAT)


def test_averaging_can_rescue_a_high_error_point():
    # error above the curve extent fails raw, but averaging pulls it back in
    steep = ThresholdCurve("steep", (1e-5, 1e-3), (0.05, 0.04))
    q_raw = RegionQuery(5e-3, 1e-3, 1)
    assert not is_fault_tolerant(q_raw, steep)  # epsilon off the right edge
    assert is_fault_tolerant(RegionQuery(5e-3, 1e-3, 8), steep)
    assert best_n(5e-3, 1e-3, [1, 2, 4, 8, 16], steep) == 8


def test_best_n_returns_none_when_hopeless():
    assert best_n(0.5, 0.5, [1, 2, 4], FLAT) is None


def test_sweep_region_order_and_content():
    pts = sweep_region([1e-3, 5e-3], [1e-3], [1, 2], FLAT)
    assert [(p.num_copies, p.epsilon) for p in pts] == [
        (1, 1e-3),
        (1, 5e-3),
        (2, 1e-3),
        (2, 5e-3),
    ]
    for p in pts:
        err, loss = effective_rates(p.epsilon, p.gamma, p.num_copies)
        assert (p.effective_error, p.effective_loss) == (err, loss)
        assert p.fault_tolerant == is_fault_tolerant(
            RegionQuery(p.epsilon, p.gamma, p.num_copies), FLAT
        )


def test_write_sweep_csv_format():
    buf = io.StringIO()
    write_sweep_csv(
        [SweepPoint(1e-3, 2e-3, 2, 0.0005, 0.004, True)],
        buf,
    )
    lines = buf.getvalue().splitlines()
    assert lines[0] == "epsilon,gamma,N,effective_error,effective_loss,fault_tolerant"
    # floats carry 17 significant digits so a rerun reproduces them bitwise
    assert lines[1] == (
        "0.001,0.002,2,0.00050000000000000001,0.0040000000000000001,true"
    )
    assert all(float(f) == v for f, v in zip(lines[1].split(",")[:2], (1e-3, 2e-3)))
