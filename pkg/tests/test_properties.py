import math

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from reldecay import kinematics as kin
from reldecay import massdist as md
from reldecay import quadrature as Q
from reldecay.analysis import verdict_for, Verdict

speeds = st.floats(0.0, 0.999)
masses = st.floats(0.01, 10.0)
momenta = st.floats(-20.0, 20.0)


@given(masses, momenta, st.floats(0.0, 20.0), speeds)
def test_mass_shell(m, p, q, v):
    E = kin.boost_energy_exact(m, p, q, v)
    k = kin.boost_momentum_exact(m, p, v, q)
    assert abs(E * E - k * k - q * q - m * m) <= 1e-10 * E * E


@given(masses, momenta, speeds)
def test_identity_closed_form(m, p, v):
    r = kin.consistency_residual(m, p, v)
    assert abs(r.r_identity - kin.lorentz_gamma(v) * v * abs(p) / m) <= 1e-12 * max(1.0, r.r_identity)
    assert r.r_carlo >= 0 and r.r_corrected >= 0


@given(st.floats(0.1, 100.0), st.floats(0.0, 50.0))
def test_gamma_identity(M, p):
    v = kin.velocity_from_p(M, p)
    assert abs(kin.gamma_from_p(M, p) - 1 / math.sqrt(1 - v * v)) <= 1e-12 * kin.gamma_from_p(M, p) ** 3


@settings(max_examples=40, deadline=None)
@given(st.floats(0.5, 3.0), st.floats(1e-3, 0.3), st.floats(0.0, 0.9), st.booleans())
def test_normalization_closed_forms(M, G, frac, gauss):
    mu0 = M * frac
    d = (md.gaussian if gauss else md.breit_wigner)(M, G, mu0)
    lo, hi = md.tail_masses(d, d.mu0, d.mu0)
    # everything above threshold: the upper tail from mu0 is the whole mass
    assert abs(hi - 1.0) < 1e-9 and lo == 0.0


@settings(max_examples=25, deadline=None)
@given(st.floats(0.05, 0.3), st.floats(0.0, 2.0), st.floats(-40.0, 40.0))
def test_conjugate_symmetry(G, p, tt):
    d = md.breit_wigner(1.0, G, 0.0)
    fi = Q.to_energy_representation(d, p, eps=1e-6)
    a = Q.fourier_transform_fast(fi, tt / G).value
    b = Q.fourier_transform_fast(fi, -tt / G).value
    assert abs(a - b.conjugate()) < 1e-13


@settings(max_examples=25, deadline=None)
@given(st.floats(0.05, 0.3), st.floats(0.0, 2.0), st.floats(0.0, 40.0))
def test_unitarity_cap(G, p, tt):
    d = md.breit_wigner(1.0, G, 0.0)
    fi = Q.to_energy_representation(d, p)
    r = Q.fourier_transform_fast(fi, tt / G)
    assert abs(r.value) <= 1 + r.error


@given(st.floats(0, 1), st.floats(0, 1), st.floats(-1e-6, 1e-6), st.floats(-1e-6, 1e-6))
def test_verdict_never_flips(d, c, e1, e2):
    a = verdict_for(d, c)
    b = verdict_for(max(d + e1, 0.0), max(c + e2, 0.0))
    assert {a, b} != {Verdict.DILATED, Verdict.CONTRACTED}
