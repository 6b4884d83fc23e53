import json
import math

import numpy as np
import pytest

import scsens


def factor_panel(seed=3, controls=8, pre=12, post=3, effect=-4.0):
    rng = np.random.default_rng(seed)
    periods = pre + post
    factors = np.cumsum(rng.normal(size=(periods, 3)), axis=0)
    loads = rng.normal(size=(controls + 1, 3))
    y = 50.0 + 5.0 * loads @ factors.T + 0.3 * rng.normal(size=(controls + 1, periods))
    y[0, pre:] += effect
    units = ["T"] + [f"C{i:02d}" for i in range(controls)]
    return scsens.Panel(units, list(range(1970, 1970 + periods)), y, "T", pre - 1)


def test_panel_and_fit():
    p = factor_panel()
    assert p.controls()[0] == "C00"
    assert p.target_index == 14
    f = scsens.fit_treated(p)
    assert f.weights.shape == (8,)
    assert f.weights.sum() == pytest.approx(1.0)
    assert (f.weights >= 0).all()
    assert f.tau_hat == pytest.approx(p.outcomes[0, -1] - f.predicted_trend[-1])


def test_analyze_report_round_trip():
    p = factor_panel()
    r = scsens.analyze(p, "cw")
    assert r.metric == scsens.MetricKind.ConstrainedWeight
    assert len(r.placebo) == 8
    assert r.nu == pytest.approx((r.j0 - 1) / 8)
    ranks = [b.percentile_rank for b in r.placebo]
    assert ranks == sorted(ranks)
    text = r.to_json()
    assert scsens.SensitivityReport.from_json(text).to_json() == text
    assert json.loads(text)["metric"] == "cw"
    assert r.svg().startswith("<svg")


def test_unconstrained_bounds_are_symmetric():
    p = factor_panel(seed=5)
    r = scsens.analyze(p, scsens.MetricKind.UnconstrainedWeight)
    for b in r.placebo:
        assert (b.lo + b.hi) / 2 == pytest.approx(r.tau_hat)


def test_coverage_and_robustness():
    p = factor_panel(seed=7)
    c = scsens.coverage(p, "uw")
    assert c.inner_placebos == 7
    assert len(c.coverage) == 8
    assert all(a <= b for a, b in zip(c.coverage, c.coverage[1:]))
    luo = scsens.leave_unit_out(p, "C02")
    assert len(luo.band_lower) == 15
    assert (luo.band_lower <= luo.band_upper).all()
    bd = scsens.backdate(p, "C04", 6)
    assert len(bd.validation_errors) == 6


def test_kernels():
    w = scsens.project_simplex(np.array([0.6, 0.1, -0.2]))
    assert w == pytest.approx([0.75, 0.25, 0.0])
    weights, objective = scsens.simplex_ls(np.eye(2), np.ones(2))
    assert objective == pytest.approx(math.sqrt(0.5))


def test_errors_are_raised():
    p = factor_panel()
    with pytest.raises(scsens.Error, match="UnknownUnit"):
        scsens.leave_unit_out(p, "Atlantis")
    with pytest.raises(scsens.Error):
        scsens.analyze(p, "l1")
    with pytest.raises(scsens.Error):
        scsens.Panel.from_csv("/nonexistent/panel.csv", "T", 1982)


def test_csv_round_trip(tmp_path):
    p = factor_panel()
    path = tmp_path / "panel.csv"
    p.to_csv(path)
    q = scsens.Panel.from_csv(path, "T", 1982)
    assert q.units == p.units
    assert np.array_equal(q.outcomes, p.outcomes)
