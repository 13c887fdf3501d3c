import math

import numpy as np
import pytest
from scipy.integrate import quad

from kasner_lab.exact_solutions import (
    DomainError,
    Family,
    FamilySpec,
    generate,
    gowdy_asymptotic_checks,
    gowdy_exponents,
    kantowski_sachs_mean_curvature,
    nut_initial_state,
)
from kasner_lab.flow_core import (
    FlowError,
    Gauge,
    constraint_residual,
    hubble_reindex,
    mean_curvature,
    scale_invariants,
    spatial_scalar_curvature,
)


def evolution_residual(spec, t, dt=1e-6):
    # dh/dt = -2 L K against central differences in the generator's time
    a, mid, b = generate(spec, [t - dt, t, t + dt])
    dh = (np.array(b.metric.diag) - np.array(a.metric.diag)) / (2 * dt)
    rhs = -2 * mid.L * np.array(mid.second_form.diag)
    return float(np.max(np.abs(dh - rhs) / (np.abs(rhs) + 1e-300)))


@pytest.mark.parametrize("fam", ["cone", "kasner", "kantowski_sachs", "gowdy_asymptotic"])
def test_generators_satisfy_evolution_and_constraint(fam):
    spec = FamilySpec(fam)
    for t in (0.2, 0.5, 0.9):
        assert evolution_residual(spec, t) < 1e-7
        assert constraint_residual(generate(spec, [t])[0]) == pytest.approx(0, abs=1e-10)


def test_cone_torus():
    s = generate(FamilySpec("cone_times_torus", {"n": 3, "n_torus": 1}), [2.0])[0]
    inv = scale_invariants(s)
    assert inv["L"] == pytest.approx(2 / 3)
    assert inv["t2R"] == pytest.approx(-4.5)
    assert s.H * s.t == pytest.approx(-3)
    assert constraint_residual(s) == pytest.approx(0, abs=1e-13)


def test_cone_examples():
    s = generate(FamilySpec("cone", {"n": 4}), [3.0])[0]
    assert s.L == 1 and s.H == pytest.approx(-4 / 3)
    assert s.t**2 * spatial_scalar_curvature(s.metric) == pytest.approx(-12)


def test_kasner_higher_dimension():
    # a three-dimensional set padded with a static direction
    p4 = [2 / 3, 2 / 3, -1 / 3, 0.0]
    s = generate(FamilySpec("kasner", {"p": p4}), [0.7])[0]
    assert s.L == pytest.approx(0.25)
    assert s.K_hat / s.H == pytest.approx(p4)


def test_kasner_rejects_bad_exponents():
    with pytest.raises(FlowError):
        FamilySpec("kasner", {"p": [0.5, 0.5, 0.0]})


def test_kantowski_sachs_mean_curvature():
    assert kantowski_sachs_mean_curvature(0.5, 0.5) == pytest.approx(-2.0)
    spec = FamilySpec("kantowski_sachs", {"m": 0.5})
    for t in (0.01, 0.3, 0.9):
        s = generate(spec, [t])[0]
        assert mean_curvature(s.second_form, s.metric) == pytest.approx(kantowski_sachs_mean_curvature(0.5, t), rel=1e-13)


def test_kantowski_sachs_limit_exponents():
    tr = hubble_reindex(generate(FamilySpec("kantowski_sachs"), [1e-10]))
    assert tr[0].K_hat / tr[0].H == pytest.approx([-1 / 3, 2 / 3, 2 / 3], abs=1e-9)


def test_kantowski_sachs_domain():
    spec = FamilySpec("kantowski_sachs", {"m": 0.5})
    for bad in ([0.0], [1.0], [1.2], [-0.1]):
        with pytest.raises(DomainError):
            generate(spec, bad)
    with pytest.raises(FlowError):
        FamilySpec("kantowski_sachs", {"m": -1})


def test_gowdy_exponents_and_oracle():
    assert gowdy_exponents(3.0) == pytest.approx((2 / 3, -1 / 3, 2 / 3))
    assert gowdy_exponents(1.0) == pytest.approx((0, 0, 1))
    for pi in (0.4, 1.0, 2.5, 3.0):
        p = gowdy_exponents(pi)
        assert sum(p) == pytest.approx(1) and sum(x * x for x in p) == pytest.approx(1)
    spec = FamilySpec("gowdy_asymptotic", {"pi": 2.5, "alpha": 0.3})
    # Hubble time equals three times proper time from the singularity
    t = 0.05
    proper, _ = quad(lambda s: math.exp((1 - 2.5**2) * -math.log(s) / 4 + 0.3), 0, t, epsabs=0, epsrel=1e-13)
    s = generate(spec, [t])[0]
    assert -3 / s.H == pytest.approx(3 * proper, rel=1e-8)
    assert s.gauge is Gauge.PROPER


def test_gowdy_report():
    rep = gowdy_asymptotic_checks(FamilySpec("gowdy_asymptotic", {"pi": 2.0}))
    assert rep.sum_residual < 1e-14 and rep.sum_sq_residual < 1e-14
    assert rep.hubble_rate_measured == pytest.approx((4 + 3) / 4, rel=1e-10)
    assert rep.volume_exponent_measured == pytest.approx(1.0, abs=1e-10)
    assert rep.exponent_deviation < 1e-12
    with pytest.raises(FlowError):
        gowdy_asymptotic_checks(FamilySpec("cone"))


@pytest.mark.parametrize("fam", ["taub_nut", "bianchi_viii_nut"])
def test_nut_families_converge_to_flat_kasner(fam):
    spec = FamilySpec(fam)
    s0 = nut_initial_state(spec)
    assert abs(s0.constraint()) < 1e-14 and s0.sigma_minus == 0 and s0.n2 == s0.n3
    tr = generate(spec, np.linspace(-60, 0, 601))
    assert tr.gauge is Gauge.WH
    first = tr[0]
    assert first.K_hat / first.H == pytest.approx([1.0, 0.0, 0.0], abs=1e-10)
    assert max(abs(constraint_residual(s)) / s.H**2 for s in tr) < 1e-8


def test_nut_parameter_validation():
    with pytest.raises(FlowError):
        FamilySpec("taub_nut", {"n1": -0.1})
    with pytest.raises(FlowError):
        FamilySpec("bianchi_viii_nut", {"n1": 0.1})
    with pytest.raises(FlowError):
        FamilySpec("taub_nut", {"sigma_sign": 0})
    with pytest.raises(FlowError):
        nut_initial_state(FamilySpec("taub_nut", {"n1": 3.0, "n2": 0.1}))


def test_family_spec_misc():
    assert FamilySpec("cone", {"n": 5}).n == 5
    assert FamilySpec(Family.KASNER).to_dict()["params"]["p"] == pytest.approx([2 / 3, 2 / 3, -1 / 3])
    with pytest.raises(FlowError):
        FamilySpec("cone", {"m": 1})
    with pytest.raises(ValueError):
        FamilySpec("no_such_family")
    with pytest.raises(DomainError):
        generate(FamilySpec("cone"), [])
