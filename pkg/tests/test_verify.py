import json
import time

import numpy as np
import pytest

from plr_curves import date, verify
from plr_curves.presets import PRESETS

SMALL = verify.GridSpec(n_centers=7, n_lines=5)


def binormal_flow(S, T):
    return np.stack([np.cos(S), np.sin(S), T], axis=-1)


def scaling_flow(S, T):
    return np.exp(T)[..., None] * np.stack([np.cos(S), np.sin(S), 0 * S], axis=-1)


class TestJudge:
    def test_second_order_passes(self):
        assert verify.judge(4e-3, 1e-3, 1e-3) == ("pass", 4.0)

    def test_small_residual_passes(self):
        status, _ = verify.judge(1e-4, 1e-4, 1e-3)
        assert status == "pass"

    def test_exact_passes(self):
        assert verify.judge(1e-12, 1e-12, 1e-3)[0] == "pass"

    def test_large_flat_residual_fails(self):
        assert verify.judge(1.0, 1.0, 1e-3) == ("fail", 1.0)

    def test_ceiling_scales_with_h(self):
        assert verify.judge(0.5, 0.5, 0.1)[0] == "pass"
        assert verify.judge(20.0, 20.0, 0.1)[0] == "fail"

    def test_skipped(self):
        assert verify.judge(1e-6, 1e-6, 1e-3, skipped=0.6)[0] == "fail"
        assert verify.judge(np.nan, np.nan, 1e-3, skipped=1.0)[0].startswith("skipped")
        assert verify.judge(np.nan, 1.0, 1e-3)[0] == "fail"


def test_binormal_flow_fails_lund_regge():
    rep = verify.convergence_report("lr", verify.lund_regge_check(binormal_flow, SMALL), 1e-3)
    assert rep.status == "fail"
    assert rep.max_residual == pytest.approx(1, abs=1e-5)


def test_binormal_flow_is_unit_speed():
    rep = verify.convergence_report("us", verify.unit_speed_check(binormal_flow, SMALL), 1e-3)
    assert rep.status == "pass"


def test_scaling_flow_fails_arclength():
    rep = verify.convergence_report("al", verify.arclength_check(scaling_flow, SMALL), 1e-3)
    assert rep.status == "fail"


def test_sine_gordon_fails_for_plr_solution():
    src = verify.Source(PRESETS["B"])
    rep = verify.convergence_report(
        "sg", verify.sine_gordon_check(lambda S, T: src.uv(S, T)[0], SMALL), 1e-3)
    assert rep.status == "fail"


def test_sine_gordon_passes_for_e():
    src = verify.Source(PRESETS["E"])
    rep = verify.convergence_report(
        "sg", verify.sine_gordon_check(lambda S, T: src.uv(S, T)[0], SMALL), 1e-3)
    assert rep.status == "pass"


def test_lr_coefficients_detect_perturbed_c():
    good = verify.convergence_report("c", verify.lr_coefficient_check(PRESETS["B"], SMALL), 1e-3)
    bad = verify.convergence_report("c", verify.lr_coefficient_check(PRESETS["B"], SMALL, 0.1), 1e-3)
    assert good.status == "pass"
    assert bad.status == "fail"


def test_compatibility_detects_perturbed_kappa():
    src = verify.Source(PRESETS["A"])
    good = verify.convergence_report("g", verify.general_compatibility_check(src, SMALL), 1e-3)
    bad = verify.convergence_report("g", verify.general_compatibility_check(src, SMALL, 0.1), 1e-3)
    assert good.status == "pass"
    assert bad.status == "fail"


def test_perturbed_q_fails_lax_based_checks():
    src = verify.Source(PRESETS["A"], perturb=0.1)
    zc = verify.convergence_report("zc", verify.zero_curvature_check(src, SMALL), 1e-3)
    plr = verify.convergence_report("plr", verify.plr_complex_check(src.q, SMALL), 1e-3)
    assert zc.status == "fail" and zc.max_residual >= 1e-2
    assert plr.status == "fail"


def test_imag_ratio_small_on_solution():
    src = verify.Source(PRESETS["B"])
    assert verify.plr_imag_ratio(src.q, SMALL, 1e-3) < 1e-3


def test_sine_gordon_applicable():
    assert verify.sine_gordon_applicable(PRESETS["E"], SMALL)
    assert verify.sine_gordon_applicable(PRESETS["D"], SMALL)
    assert not verify.sine_gordon_applicable(PRESETS["A"], SMALL)


def test_kappa_segments():
    k = np.array([0, 0.2, 0.3, 0, 0, 0.5])
    assert verify.kappa_segments(k) == [(1, 3), (5, 6)]


def test_threshold_report():
    assert verify.threshold_report("x", 1e-12, 1e-9).status == "pass"
    assert verify.threshold_report("x", 1e-3, 1e-9).status == "fail"
    assert verify.threshold_report("x", 0, 1e-9, skipped_reason="n/a").status == "skipped: n/a"


def test_run_suite_small_grid_json():
    reports = verify.run_suite(PRESETS["E"], SMALL)
    names = [r.name for r in reports]
    assert "sine_gordon" in names and "reality_up_to_phase" in names
    bad = [(r.name, r.status) for r in reports if r.status == "fail"]
    assert not bad
    data = json.loads(verify.reports_json(reports))
    assert set(data[0]) == {"name", "grid", "h", "max_residual", "convergence_ratio",
                            "skipped_fraction", "status"}


def test_run_suite_perturbed():
    reports = {r.name: r for r in verify.run_suite(PRESETS["A"], SMALL, perturb=0.1)}
    assert reports["zero_curvature"].status == "fail"
    assert reports["plr_complex"].status == "fail"
    # the curve and its Lax pair do not see the perturbation of q
    assert reports["lund_regge"].status == "pass"
    assert date.is_sine_gordon(PRESETS["A"]).holds is False


@pytest.mark.parametrize("name", list(PRESETS))
def test_full_suite_per_preset(name):
    t0 = time.perf_counter()
    reports = verify.run_suite(PRESETS[name])
    elapsed = time.perf_counter() - t0
    bad = [(r.name, r.max_residual, r.convergence_ratio) for r in reports if r.status == "fail"]
    assert not bad
    assert all(r.skipped_fraction < 0.5 for r in reports if r.status == "pass")
    assert elapsed < 60
