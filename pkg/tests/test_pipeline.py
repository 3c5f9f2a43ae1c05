import io
import math

import numpy as np
import pytest

from rfimdi.errors import DomainError
from rfimdi.pipeline import (
    DEFAULTS,
    RECORD_FIELDS,
    Scenario,
    Sweep,
    evaluate_point,
    evaluate_sps,
    evaluate_wcs,
    expand_key,
    heatmap,
    optimize_intensities,
    run_scenario,
    write_records,
)


def test_expand_key_aliases():
    assert expand_key("source.delta_z") == ["alice.delta1", "alice.delta2", "bob.delta1", "bob.delta2"]
    assert expand_key("bob.theta") == ["bob.theta1", "bob.theta2"]
    assert expand_key("channel.distance") == ["channel.distance"]
    for bad in ("alice.delta9", "distance", "decoy.lambda"):
        with pytest.raises(DomainError):
            expand_key(bad)


def test_scenario_validation():
    with pytest.raises(DomainError):
        Scenario("pulsed")
    with pytest.raises(DomainError):
        Sweep("channel.distance", 0, 100, 1)
    with pytest.raises(DomainError):
        Sweep("channel.distance", 100, 0, 5)
    sc = Scenario("sps", {"source.delta": 0.063, "bob.delta4": 0.0})
    assert sc.params["alice.delta4"] == 0.063 and sc.params["bob.delta4"] == 0.0
    assert sc.params["detector.eta"] == DEFAULTS["detector.eta"]


def test_sps_ideal_dark_free_point():
    params = Scenario("sps", {"detector.dark": 0.0, "channel.distance": 50.0}).params
    pt = evaluate_sps(params)
    assert abs(pt.C_low - 2) < 1e-10 and pt.e_zz_up < 1e-12
    assert math.isclose(pt.rate.R, pt.Q_zz, rel_tol=1e-10)


def test_wcs_distance_monotone():
    sc = Scenario("wcs", sweep=Sweep("channel.distance", 0, 200, 9))
    r = [row["R_raw"] for row in run_scenario(sc)]
    assert all(b <= a + 1e-6 for a, b in zip(r, r[1:]))
    assert r[0] > 0


def test_sps_distance_monotone():
    sc = Scenario("sps", {"source.delta": 0.126}, Sweep("channel.distance", 0, 300, 16))
    r = [row["R_raw"] for row in run_scenario(sc)]
    assert all(b <= a + 1e-6 for a, b in zip(r, r[1:]))


def test_degenerate_points_recorded():
    sc = Scenario("wcs", sweep=Sweep("source.delta1", 0.0, math.pi / 2, 3))
    rows = run_scenario(sc)
    assert [bool(r["error"]) for r in rows] == [False, False, True]
    assert rows[2]["error"].startswith("SingularPreparationError")
    assert rows[2]["R_raw"] == ""


def test_rows_ordered_and_complete():
    sc = Scenario("sps", sweep=Sweep("channel.distance", 0, 100, 5))
    rows = run_scenario(sc)
    assert [r["x"] for r in rows] == [0, 25, 50, 75, 100]
    assert all(set(r) == set(RECORD_FIELDS) for r in rows)


def test_parallel_matches_serial():
    sc = Scenario("sps", sweep=Sweep("channel.distance", 0, 100, 4))
    assert run_scenario(sc, jobs=2) == run_scenario(sc)


def test_write_records_stable():
    sc = Scenario("wcs", sweep=Sweep("channel.distance", 0, 100, 3))
    a, b = io.StringIO(), io.StringIO()
    write_records(run_scenario(sc), a)
    write_records(run_scenario(sc), b)
    assert a.getvalue() == b.getvalue()
    lines = a.getvalue().splitlines()
    assert lines[0] == ",".join(RECORD_FIELDS)
    assert len(lines) == 4


def test_write_records_rejects_invalid():
    row = {k: "" for k in RECORD_FIELDS}
    row.update(I_E=1.5, C_low=2.0, e_zz_up=0.0)
    with pytest.raises(DomainError):
        write_records([row], io.StringIO())


def test_z_flaws_hurt_xy_flaws_do_not():
    base = {"channel.distance": 100.0}
    r0 = evaluate_wcs(Scenario("wcs", base).params)
    rz = evaluate_wcs(Scenario("wcs", {**base, "source.delta_z": 0.126}).params)
    rxy = evaluate_wcs(Scenario("wcs", {**base, "source.delta_xy": 0.126}).params)
    assert rz.rate.R < r0.rate.R and rz.E_zz > r0.E_zz
    assert abs(rxy.rate.R - r0.rate.R) < 0.02 * r0.rate.R


def test_heatmap_symmetric_small():
    sc = Scenario(
        "sps",
        {"channel.distance": 100.0},
        Sweep("alice.delta_z", 0, 0.126, 3),
        Sweep("bob.delta_z", 0, 0.126, 3),
    )
    rows = heatmap(sc)
    assert [(r["x"], r["y"]) for r in rows[:3]] == [(0, 0), (0, 0.063), (0, 0.126)]
    grid = np.array([r["R_raw"] for r in rows]).reshape(3, 3)
    assert np.max(np.abs(grid - grid.T)) < 1e-9 * np.max(np.abs(grid))
    assert grid[0, 0] == grid.max() and grid[2, 2] < grid[0, 0]


def test_heatmap_needs_two_axes():
    with pytest.raises(DomainError):
        heatmap(Scenario("sps", sweep=Sweep("channel.distance", 0, 1, 2)))


@pytest.fixture(scope="module")
def optimum_at_zero():
    return optimize_intensities(Scenario("wcs").params)


def test_optimizer_beats_reference(optimum_at_zero):
    ref = evaluate_wcs(Scenario("wcs").params, 0.3, 0.05).rate.R
    assert optimum_at_zero.R >= ref
    assert optimum_at_zero.positive


def test_optimizer_constraints(optimum_at_zero):
    o = optimum_at_zero
    assert o.mu > o.nu >= 0.01 and 0.05 <= o.mu <= 0.8
    assert math.isclose(evaluate_wcs(Scenario("wcs").params, o.mu, o.nu).rate.R, o.R)


def test_optimizer_deterministic(optimum_at_zero):
    assert optimize_intensities(Scenario("wcs").params) == optimum_at_zero


def test_optimizer_no_positive_key():
    o = optimize_intensities(Scenario("wcs", {"channel.distance": 400.0}).params)
    assert not o.positive and o.R <= 0


def test_evaluate_point_records_optimum():
    row = evaluate_point("wcs", Scenario("wcs", {"channel.distance": 400.0}).params, optimize=True)
    assert row["mu_opt"] > row["nu_opt"] and row["error"] == ""
