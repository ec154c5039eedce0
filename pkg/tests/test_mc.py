import json

import numpy as np
import pytest

from lwhittle.bandwidth import BandwidthRule
from lwhittle.errors import SpecError
from lwhittle.estimators import EstimatorSpec
from lwhittle.mc import MCConfig, MCRow, MCSummary, run, samples_csv, summary_csv, table


def small_config(**kw):
    base = dict(n=200, reps=12, seed=5, d_values=(0.0, 0.4),
                estimators=(EstimatorSpec("lw"), EstimatorSpec("elw"), EstimatorSpec("hc")))
    base.update(kw)
    return MCConfig(**base)


def test_single_rep_aggregation():
    s = run(small_config(reps=1))
    for r in s.rows:
        assert r.sd == 0.0
        assert r.mse == r.bias ** 2


def test_mse_decomposition():
    s = run(small_config())
    for r in s.rows:
        assert r.mse == pytest.approx(r.bias ** 2 + r.sd ** 2, abs=1e-10)
        assert r.reps_used + r.failures == 12


def test_common_random_numbers():
    a = run(small_config(mu_values=(0.0, 5.0)))
    # LW is invariant to a level shift, so identical paths give identical estimates
    np.testing.assert_allclose(a.samples[0, 0], a.samples[1, 0], rtol=0, atol=1e-8)


def test_workers_bit_identical():
    cfg = small_config()
    assert run(cfg, workers=1) == run(cfg, workers=3)


def test_deterministic_and_seed_sensitive():
    assert run(small_config()) == run(small_config())
    assert run(small_config()) != run(small_config(seed=6))


def test_failures_counted_not_dropped(monkeypatch):
    import lwhittle.mc as mc_mod

    calls = {"n": 0}
    real = mc_mod.estimate

    def flaky(x, spec):
        calls["n"] += 1
        if spec.method == "elw" and calls["n"] % 4 == 0:
            raise ArithmeticError("forced")
        return real(x, spec)

    monkeypatch.setattr(mc_mod, "estimate", flaky)
    s = run(small_config(d_values=(0.0,)))
    lw, elw = s.rows[0], s.rows[1]
    assert lw.failures == 0 and lw.reps_used == 12
    assert elw.failures > 0 and elw.reps_used + elw.failures == 12
    assert np.isnan(s.samples[0, 1]).sum() == elw.failures
    assert "warning: elw failed" in table(s)


def test_config_validation():
    with pytest.raises(SpecError, match="no estimators"):
        small_config(estimators=())
    with pytest.raises(SpecError):
        small_config(reps=0)
    with pytest.raises(SpecError):
        small_config(d_values=())
    with pytest.raises(SpecError):
        small_config(bandwidth=BandwidthRule.bootstrap())
    with pytest.raises(SpecError):
        small_config(bounds_policy="centered", half_width=2.5)
    with pytest.raises(SpecError):
        MCConfig.from_dict({"n": 100, "reps": 1, "d_values": [0], "estimators": ["lw"], "colour": 1})


def test_centered_bounds():
    cfg = small_config(bounds_policy="centered", half_width=1.5, d_values=(2.0,))
    assert cfg.spec_for(cfg.estimators[1], 2.0).bounds == (0.5, 3.5)


def test_json_round_trip():
    cfg = small_config(rho_values=(0.0, 0.5), bandwidth=BandwidthRule.power_floor(0.6),
                       estimators=(EstimatorSpec("velasco", taper="bartlett"),
                                   EstimatorSpec("2elw", trend=1, bounds=(-1.0, 2.0))))
    assert MCConfig.from_json(cfg.to_json()) == cfg
    assert json.loads(cfg.to_json())["estimators"][0] == {"method": "velasco", "taper": "bartlett"}


def fake_summary(mses):
    cfg = small_config(estimators=(EstimatorSpec("lw"),), d_values=tuple(range(len(mses))))
    rows = tuple(MCRow(float(d), 0.0, 0.0, 0.0, "lw", 34, 0.0, 0.0, v, 10, 0) for d, v in enumerate(mses))
    return MCSummary(cfg, rows, np.zeros((len(mses), 1, 10)))


def test_shading_is_strict():
    text = table(fake_summary([0.051, 0.05]))
    body = text.splitlines()[2:4]
    assert body[0].rstrip().endswith("0.0510*")
    assert "*" not in body[1]


def test_table_layouts_and_footer():
    s = run(small_config())
    wide = table(s)
    assert "lw:bias" in wide and "elw:mse" in wide
    long = table(s, layout="long")
    assert len(long.splitlines()) == 2 + 6 + 1
    rows = list(fake_summary([0.01]).rows)
    rows[0] = MCRow(0.0, 0.0, 0.0, 0.0, "lw", 34, 0.0, 0.0, 0.01, 98, 2)
    s2 = MCSummary(fake_summary([0.01]).config, tuple(rows), np.zeros((1, 1, 10)))
    assert "warning: lw failed in 2 of 100" in table(s2)


def test_table_four_decimals():
    line = table(fake_summary([0.123456])).splitlines()[2]
    assert "0.1235" in line


def test_csv_exports():
    s = run(small_config(reps=3))
    lines = summary_csv(s).splitlines()
    assert lines[0].startswith("d,rho,mu,beta,estimator") and len(lines) == 1 + 6
    assert len(samples_csv(s).splitlines()) == 1 + 2 * 3 * 3


@pytest.mark.slow
def test_null_design_all_estimators():
    ests = (EstimatorSpec("lw"), EstimatorSpec("velasco", taper="kolmogorov"), EstimatorSpec("hc"),
            EstimatorSpec("elw"), EstimatorSpec("2elw"))
    s = run(MCConfig(n=500, reps=1000, seed=11, d_values=(0.0,), estimators=ests), workers=4)
    targets = {"lw": 0.067, "hc": 0.082, "elw": 0.067, "2elw": 0.067}
    for r in s.rows:
        assert abs(r.bias) < 0.03, r
        if r.estimator in targets:
            assert abs(r.sd - targets[r.estimator]) <= 0.02, r


@pytest.mark.slow
@pytest.mark.xfail(reason="finite-sample SD of the order-3 taper exceeds its asymptotic SE at n=500", strict=True)
def test_null_design_kolmogorov_sd_near_asymptotic():
    # asymptotic SE sqrt(3 * 1.00354 / 224) = 0.116; the finite-sample SD at
    # n = 500 is near 0.16, in line with published simulations
    s = run(MCConfig(n=500, reps=1000, seed=11, d_values=(0.0,),
                     estimators=(EstimatorSpec("velasco", taper="kolmogorov"),)), workers=4)
    assert abs(s.rows[0].sd - 0.116) <= 0.02
