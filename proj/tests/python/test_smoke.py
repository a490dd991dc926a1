import json
import math

import numpy as np
import pytest

import stadloc


def test_shape_and_bounce():
    st = stadloc.StadiumShape(0.1)
    assert st.perimeter == pytest.approx(2 * math.pi + 0.2)
    assert st.contains(0.0, 0.5)
    assert not st.contains(0.0, 1.5)
    s, p = stadloc.bounce_map(stadloc.StadiumShape(0.0), 0.3, 0.42)
    assert abs(p - 0.42) < 1e-12


def test_circle_levels_match_bessel_zero():
    levels, states = stadloc.solve_range(stadloc.StadiumShape(0.0), 5.0, 5.3)
    assert len(levels) == 1
    # first zero of J_2
    assert levels[0] == pytest.approx(5.1356223018, rel=1e-6)
    assert states[0].boundary.u.shape == states[0].boundary.s.shape


def test_husimi_and_measures():
    _, states = stadloc.solve_range(stadloc.StadiumShape(0.1), 20.0, 21.0)
    assert states
    h = stadloc.husimi_grid(stadloc.StadiumShape(0.1), states[0].boundary, 40, 40)
    assert h.shape == (40, 40)
    assert h.sum() == pytest.approx(1.0, abs=1e-12)
    rec = stadloc.entropy_measure(h)
    assert 0 < rec.A <= 1
    assert rec.nIPR == pytest.approx(stadloc.nipr(h))
    uniform = np.full((20, 20), 1 / 400)
    assert stadloc.entropy_measure(uniform).A == pytest.approx(1.0, abs=1e-14)


def test_fitters():
    rng = np.random.default_rng(3)
    samples = 0.7 * rng.beta(3.87, 5.43, size=1000)
    fit = stadloc.fit_beta(list(samples))
    assert fit.a == pytest.approx(2.87, rel=0.15)
    assert fit.b == pytest.approx(4.43, rel=0.15)
    alphas = [0.1 * 1.7**i for i in range(12)]
    r = stadloc.fit_rational([(a, stadloc.rational_model(a, 0.58, 0.19)) for a in alphas])
    assert r.limit == pytest.approx(0.58, abs=1e-8)
    assert stadloc.brody_pdf(1.0, 0.0) == pytest.approx(math.exp(-1.0))


def test_transport_and_errors():
    curve = stadloc.simulate_ensemble(stadloc.StadiumShape(0.2), 1000, 1500, seed=4)
    assert curve.var_p[0] == 0.0
    assert curve.var_p[-1] == pytest.approx(stadloc.SATURATED_VARIANCE, rel=0.05)
    est = stadloc.estimate_NT(curve, "f50")
    assert est.N_T > 0
    with pytest.raises(stadloc.Error, match="DegenerateShape"):
        stadloc.simulate_ensemble(stadloc.StadiumShape(0.0), 1000, 10)


def test_pipeline_config_error(tmp_path):
    cfg = {"epsilons": [], "k0": [100], "k0_width": 5, "out": str(tmp_path)}
    with pytest.raises(stadloc.Error, match="ConfigError"):
        stadloc.run_pipeline(json.dumps(cfg))


def test_pipeline_transport_stage(tmp_path):
    cfg = {"epsilons": [0.2], "k0": [100], "k0_width": 5, "out": str(tmp_path),
           "transport": {"particles": 1000, "collisions": 1500}}
    run = stadloc.run_pipeline(json.dumps(cfg), ["transport"])
    manifest = json.loads((tmp_path / "run" / "manifest.json").read_text())
    assert run.endswith("run")
    assert manifest["complete"] is True
    assert manifest["stages"][0]["name"] == "transport"
