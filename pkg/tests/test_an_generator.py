import cmath
import math

import numpy as np
import pytest

from cesec.an_generator import (AnComponent, Scheme1Options, aggregate_an_at,
                                an_amplitude, an_power_target_from_eta,
                                cancel_antenna_power, combined_symbols,
                                scheme1_solve, scheme2_generate)
from cesec.capacity import SystemParams, eve_upper_bound_scheme2
from cesec.ce_precoder import precode
from cesec.channel import ChannelVector, derive_trial_stream, sample_channel
from cesec.special_math import norm_1, norm_2


def _uniform_phases(gen, n):
    return gen.uniform(-np.pi, np.pi, n)


def test_an_amplitude_quadrature_phase_gives_zero():
    assert an_amplitude(0.3, 0.3 - np.pi / 2) == pytest.approx(0.0, abs=1e-15)


def test_an_amplitude_opposite_phase():
    theta = 0.7
    beta = float(an_amplitude(theta, theta - np.pi))
    assert beta == pytest.approx(2.0)
    combined = cmath.exp(1j * theta) + beta * cmath.exp(1j * (theta - np.pi))
    assert abs(combined) == pytest.approx(1.0)


def test_an_amplitude_chord_identity():
    theta = -1.1
    beta = float(an_amplitude(theta, theta - np.pi / 3))
    assert beta == pytest.approx(-1.0)
    combined = cmath.exp(1j * theta) - cmath.exp(1j * (theta - np.pi / 3))
    assert abs(combined) == pytest.approx(2.0 * math.sin(np.pi / 6))
    assert abs(combined) == pytest.approx(1.0)


def test_envelope_preserved_for_any_phase_pair():
    gen = derive_trial_stream(31, 0).generator()
    theta = _uniform_phases(gen, 1000)
    phi = _uniform_phases(gen, 1000)
    an = AnComponent(amplitudes=np.asarray(an_amplitude(theta, phi)), phases=phi)
    mods = np.abs(combined_symbols(theta, an))
    assert np.max(np.abs(mods - 1.0)) < 1e-12


def test_quadratic_root_identity():
    gen = derive_trial_stream(31, 1).generator()
    theta = _uniform_phases(gen, 500)
    phi = _uniform_phases(gen, 500)
    beta = np.asarray(an_amplitude(theta, phi))
    assert np.max(np.abs(beta ** 2 + 2 * beta * np.cos(theta - phi))) < 1e-10


def test_power_target_from_eta():
    assert an_power_target_from_eta(100, 0.5) == pytest.approx(100.0)
    assert an_power_target_from_eta(100, 0.75) == pytest.approx(100.0 / 3.0)
    assert an_power_target_from_eta(100, 1.0) == 0.0
    with pytest.raises(ValueError):
        an_power_target_from_eta(100, 0.0)


# ---------------------------------------------------------------- scheme II

def test_scheme2_cancels_exactly_at_user():
    for t in range(200):
        gen = derive_trial_stream(32, t).generator()
        h = sample_channel(32, True, gen)
        theta = _uniform_phases(gen, 32)
        an = scheme2_generate(h, theta, gen)
        agg = aggregate_an_at(h, an, p_t=32.0)
        assert abs(agg) <= 1e-12 * norm_2(h.gains)


def test_scheme2_cancel_signal_scales_inversely_with_h0():
    base = sample_channel(16, True, derive_trial_stream(33, 0))
    theta = _uniform_phases(derive_trial_stream(33, 1).generator(), 16)
    scaled = ChannelVector(gains=base.gains, cancel_gain=base.cancel_gain * 2.5)
    an_a = scheme2_generate(base, theta, derive_trial_stream(33, 2))
    an_b = scheme2_generate(scaled, theta, derive_trial_stream(33, 2))
    assert an_b.cancel_signal == pytest.approx(an_a.cancel_signal / 2.5)
    assert (base.cancel_gain * an_a.cancel_signal
            == pytest.approx(scaled.cancel_gain * an_b.cancel_signal))


def test_scheme2_defining_relation_implies_zero_leak_zero_x0():
    # x_0 = -leak/h_0 exactly, so zero leakage yields a zero cancel signal
    h = sample_channel(8, True, derive_trial_stream(33, 5))
    theta = _uniform_phases(derive_trial_stream(33, 6).generator(), 8)
    an = scheme2_generate(h, theta, derive_trial_stream(33, 7))
    leak = complex(np.sum(h.gains * an.amplitudes * np.exp(1j * an.phases)))
    assert an.cancel_signal == pytest.approx(-leak / h.cancel_gain, rel=1e-15)


def test_scheme2_requires_cancel_gain():
    h = sample_channel(8, False, derive_trial_stream(34, 0))
    theta = np.zeros(8)
    with pytest.raises(ValueError):
        scheme2_generate(h, theta, derive_trial_stream(34, 1))


def test_scheme2_low_h0_flag():
    gains = sample_channel(8, False, derive_trial_stream(34, 2)).gains
    weak = ChannelVector(gains=gains, cancel_gain=1e-4 + 0j)
    an = scheme2_generate(weak, np.zeros(8), derive_trial_stream(34, 3))
    assert an.low_cancel_gain
    strong = ChannelVector(gains=gains, cancel_gain=1.0 + 0j)
    an2 = scheme2_generate(strong, np.zeros(8), derive_trial_stream(34, 3))
    assert not an2.low_cancel_gain


def test_scheme2_amplitude_second_moment():
    # beta = -2cos(uniform) has E[beta^2] = 2
    h = sample_channel(100_000, True, derive_trial_stream(35, 0))
    theta = _uniform_phases(derive_trial_stream(35, 1).generator(), 100_000)
    an = scheme2_generate(h, theta, derive_trial_stream(35, 2))
    assert np.mean(an.amplitudes ** 2) == pytest.approx(2.0, rel=0.02)


def test_cancel_antenna_power_diagnostic():
    h = sample_channel(16, True, derive_trial_stream(36, 0))
    theta = _uniform_phases(derive_trial_stream(36, 1).generator(), 16)
    an = scheme2_generate(h, theta, derive_trial_stream(36, 2))
    expected = (4.0 / 16) * abs(an.cancel_signal) ** 2
    assert cancel_antenna_power(an, p_t=4.0, n_t=16) == pytest.approx(expected)
    no_cancel = AnComponent(amplitudes=np.zeros(3), phases=np.zeros(3))
    assert cancel_antenna_power(no_cancel, 4.0, 3) == 0.0


# ---------------------------------------------------------------- aggregate

def test_aggregate_zero_an_is_zero():
    an = AnComponent(amplitudes=np.zeros(5), phases=np.linspace(-1, 1, 5))
    h = sample_channel(5, False, derive_trial_stream(37, 0))
    assert aggregate_an_at(h, an, p_t=9.0) == 0.0


def test_aggregate_length_mismatch():
    an = AnComponent(amplitudes=np.zeros(4), phases=np.zeros(4))
    h = sample_channel(5, False, derive_trial_stream(37, 1))
    with pytest.raises(ValueError):
        aggregate_an_at(h, an, p_t=1.0)


def test_aggregate_at_eavesdropper_matches_power_estimator():
    # Mean |aggregate AN at g|^2 must agree with the estimator's AN power
    # term.  The cancel signal's power is heavy-tailed (1/|h_0|^2 has no
    # finite mean), so independent-seed sample means are not comparable;
    # running both sides on the same trial streams makes the check exact.
    n, trials, p_t = 8, 2000, 8.0
    p = SystemParams(p_t=p_t, sigma2=1.0, n_t=n)
    vals = np.empty(trials)
    for t in range(trials):
        gen = derive_trial_stream(380, t).generator()
        h = sample_channel(n, True, gen)
        g = sample_channel(n, True, gen)
        psi = math.pi - gen.uniform(0.0, 2 * np.pi)
        u = 0.5 * norm_1(h.gains) / math.sqrt(n) * cmath.exp(1j * psi)
        pre = precode(u, h, stream=gen)
        an = scheme2_generate(h, pre.phases, gen)
        vals[t] = abs(aggregate_an_at(g, an, p_t=p_t, n_t=n)) ** 2
        assert abs(aggregate_an_at(g, an, p_t=p_t, n_t=n)) > 0.0  # generically nonzero
    est = eve_upper_bound_scheme2(p, trials, seed=380)
    assert float(np.mean(vals)) == pytest.approx(est.diagnostics["mean_p_n_an"],
                                                 rel=1e-12)


# ----------------------------------------------------------------- scheme I

def test_scheme1_hits_power_target_not_degenerate_zero():
    gen = derive_trial_stream(39, 0).generator()
    h = sample_channel(24, False, gen)
    theta = _uniform_phases(gen, 24)
    opts = Scheme1Options(an_power_target=8.0)
    an = scheme1_solve(h, theta, opts, gen)
    assert an.converged
    power = float(np.sum(an.amplitudes ** 2))
    assert abs(power - 8.0) <= 0.8
    assert an.invisibility_residual <= 1e-6 * norm_2(h.gains)


def test_scheme1_zero_target_reaches_degenerate_point():
    gen = derive_trial_stream(39, 1).generator()
    h = sample_channel(12, False, gen)
    theta = _uniform_phases(gen, 12)
    an = scheme1_solve(h, theta, Scheme1Options(an_power_target=0.0), gen)
    assert an.converged
    assert float(np.sum(an.amplitudes ** 2)) <= 1e-8


def test_scheme1_envelope_preserved_even_without_convergence():
    gen = derive_trial_stream(39, 2).generator()
    h = sample_channel(16, False, gen)
    theta = _uniform_phases(gen, 16)
    opts = Scheme1Options(an_power_target=5.0, max_iters=1)
    an = scheme1_solve(h, theta, opts, gen)
    mods = np.abs(combined_symbols(theta, an))
    assert np.max(np.abs(mods - 1.0)) < 1e-12


def test_scheme1_symmetric_boundary_instance_is_infeasible():
    # With h all-ones and theta = 0 the synthesized signal sits on the outer
    # boundary of the reachable set, so the only invisible AN has beta = 0:
    # sum cos(phi_i) e^{j phi_i} = 2 + (1/2) sum e^{j 2 phi_i} can vanish only
    # with every 2 phi_i = pi.  A nonzero power target is therefore
    # unreachable and the solver must say so.
    h = ChannelVector(gains=np.ones(4, dtype=complex))
    theta = np.zeros(4)
    candidate = np.array([2 * np.pi / 3, -2 * np.pi / 3,
                          2 * np.pi / 3, -2 * np.pi / 3])
    beta = np.asarray(an_amplitude(theta, candidate))
    assert np.allclose(beta, 1.0)
    leak = complex(np.sum(h.gains * beta * np.exp(1j * candidate)))
    assert leak == pytest.approx(-2.0)   # candidate violates invisibility
    opts = Scheme1Options(an_power_target=1.0, max_iters=150)
    an = scheme1_solve(h, theta, opts, derive_trial_stream(40, 0))
    assert not an.converged


def test_scheme1_statistical_success_rate():
    # acceptance runs the full 200-trial version at N_t = 100
    n, trials = 100, 50
    ok = 0
    opts = Scheme1Options(an_power_target=n / 3.0)
    for t in range(trials):
        gen = derive_trial_stream(41, t).generator()
        h = sample_channel(n, False, gen)
        u = 0.5 * norm_1(h.gains) / math.sqrt(n) * cmath.exp(1j * gen.uniform(-np.pi, np.pi))
        pre = precode(u, h, stream=gen)
        an = scheme1_solve(h, pre.phases, opts, gen)
        if (an.converged
                and an.invisibility_residual <= 1e-6 * norm_2(h.gains)
                and abs(float(np.sum(an.amplitudes ** 2)) - n / 3.0) <= 0.1 * n / 3.0):
            ok += 1
    assert ok >= 0.95 * trials


def test_scheme1_validation_errors():
    h = sample_channel(4, False, derive_trial_stream(42, 0))
    theta = np.zeros(4)
    with pytest.raises(ValueError):
        scheme1_solve(h, theta, Scheme1Options(an_power_target=17.0),
                      derive_trial_stream(42, 1))   # > 4 N_t
    with pytest.raises(ValueError):
        scheme1_solve(h, theta, Scheme1Options(an_power_target=-1.0),
                      derive_trial_stream(42, 1))
    h2 = sample_channel(2, False, derive_trial_stream(42, 2))
    with pytest.raises(ValueError):
        scheme1_solve(h2, np.zeros(2), Scheme1Options(an_power_target=1.0),
                      derive_trial_stream(42, 3))
