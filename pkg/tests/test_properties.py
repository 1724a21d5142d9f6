import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from photonsource import closed_form as cf
from photonsource.gf import moments, photon_distribution, propagate_gf
from photonsource.params import RAF, Piecewise, SquarePulse

omegas = st.floats(0.0, 8.0, allow_nan=False)
times = st.floats(0.0, 20.0, allow_nan=False)


@settings(max_examples=200, deadline=None)
@given(omegas, times)
def test_closed_form_is_a_distribution(omega, big_t):
    p = [cf.cf_pn(omega, big_t, n) for n in range(3)]
    assert all(-1e-12 <= v <= 1 + 1e-12 for v in p)
    assert sum(p) <= 1 + 1e-10
    mean, fac2 = cf.cf_mean_n(omega, big_t), cf.cf_fac2(omega, big_t)
    assert mean >= -1e-12 and fac2 >= -1e-12
    # P1 + 2 P2 cannot exceed the mean, and 2 P2 cannot exceed <N(N-1)>
    assert p[1] + 2 * p[2] <= mean + 1e-9
    assert 2 * p[2] <= fac2 + 1e-9
    q = cf.cf_q(omega, big_t)
    assert np.isnan(q) or q >= -1 - 1e-9


@settings(max_examples=25, deadline=None)
@given(st.floats(0.0, 4.0), st.floats(0.1, 8.0))
def test_hierarchy_matches_closed_form(omega, big_t):
    dist = photon_distribution(SquarePulse(omega, big_t), n_max=6)
    for n in range(3):
        assert abs(dist[n] - cf.cf_pn(omega, big_t, n)) < 1e-7
    assert dist.tail_bound >= -1e-9
    assert np.all(dist.probs >= -1e-10) and np.all(dist.probs <= 1 + 1e-10)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.tuples(st.floats(0.1, 2.0), st.floats(0.0, 4.0), st.floats(-4.0, 4.0)),
                min_size=2, max_size=6))
def test_piecewise_fields_stay_normalised(steps):
    t = np.cumsum([s[0] for s in steps])
    fld = Piecewise(tuple((float(ti), om, de) for ti, (_, om, de) in zip(t, steps)))
    assert abs(2 * propagate_gf(fld, 1.0, fld.support_end).y - 1) < 1e-9
    mom = moments(fld)
    assert mom.mean_n >= -1e-10 and mom.fac2 >= -1e-10
    assert mom.q is None or mom.q >= -1 - 1e-9


@settings(max_examples=15, deadline=None)
@given(st.floats(0.0, 5.0), st.floats(0.0, 80.0), st.floats(0.1, 0.5), st.floats(0, 6.3))
def test_raf_fields_stay_normalised(omega, delta_rf, nu_rf, phase):
    fld = RAF(omega, delta_rf, nu_rf, phase=phase)
    assert abs(2 * propagate_gf(fld, 1.0, fld.window).y - 1) < 1e-9
