import math

import numpy as np
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from fiberring import io
from fiberring.constants import TWO_PI
from fiberring.cqed import AtomParams, ScalingReference, arrowhead_eigenvalues, scale_with_length
from fiberring.resonator import (
    CouplingRegime,
    ResonatorParams,
    RingAmplitudes,
    classify_regime,
    exact_ring_power,
    field_transmission,
    rates_from_ring,
    ring_from_rates,
)
from fiberring.spectrum import CouplingSweepDataset, global_kappa0_fit

rates = st.floats(1e3, 1e7)
ratios = st.floats(0.0, 20.0)


@given(k0=rates, ratio=ratios, x=st.floats(-50, 50))
def test_field_magnitude_bounded(k0, ratio, x):
    p = ResonatorParams(k0, ratio * k0, 1.0, 1e12)
    assert abs(field_transmission(p, 1.0 + x * k0)) <= 1 + 1e-12


@given(a=st.floats(1e-3, 1.0), r=st.floats(1e-3, 1.0), phi=st.floats(-10, 10))
def test_ring_power_in_unit_interval(a, r, phi):
    assume(not (a == 1.0 and r == 1.0))
    T = exact_ring_power(RingAmplitudes(a, r), phi)
    assert -1e-15 <= T <= 1 + 1e-12


@given(k0=st.floats(1e3, 1e8), ratio=st.floats(0.0, 10.0), length=st.floats(0.1, 100.0))
def test_rate_mapping_inverse(k0, ratio, length):
    ng = 1.46
    fsr = 299792458.0 / (ng * length)
    assume((1 + ratio) * k0 / TWO_PI < 0.1 * fsr)
    amps = ring_from_rates(k0, ratio * k0, length, ng)
    b0, be = rates_from_ring(amps, length, ng)
    assert math.isclose(b0, k0, rel_tol=1e-9)
    assert math.isclose(be, ratio * k0, rel_tol=1e-9, abs_tol=1e-9 * k0)


@given(k0=st.floats(0.1, 10.0), ke=st.floats(0.0, 30.0))
def test_regime_depends_on_sign_only(k0, ke):
    reg = classify_regime(k0, ke, rel_tol=0.0)
    if ke < k0:
        assert reg is CouplingRegime.UNDERCOUPLED
    elif ke > k0:
        assert reg is CouplingRegime.OVERCOUPLED
    else:
        assert reg is CouplingRegime.CRITICAL


@settings(max_examples=50, deadline=None)
@given(
    k0=st.floats(1.0, 10.0),
    factors=st.lists(st.floats(1.05, 8.0), min_size=2, max_size=12, unique=True),
    seed=st.integers(0, 2**31),
)
def test_global_fit_permutation_invariant(k0, factors, seed):
    ks = np.array(factors) * k0
    assume(np.ptp(ks) > 1e-3 * k0)
    T = ((2 * k0 - ks) / ks) ** 2
    pts = list(zip(ks, T))
    a = global_kappa0_fit(CouplingSweepDataset(tuple(pts))).kappa0
    np.random.default_rng(seed).shuffle(pts)
    b = global_kappa0_fit(CouplingSweepDataset(tuple(pts))).kappa0
    assert math.isclose(a, b, rel_tol=1e-9)
    assert math.isclose(a, k0, rel_tol=1e-8)


@given(lengths=st.lists(st.floats(0.5, 500.0), min_size=1, max_size=10))
def test_cooperativity_length_independent_without_fiber_loss(lengths):
    ref = ScalingReference(2.35, TWO_PI * 0.58e6, TWO_PI * 1.5e6, 87.5e6, 0.0)
    atoms = AtomParams(TWO_PI * 2.6e6, TWO_PI * 1.5e6, 2000)
    c_ref = scale_with_length(ref, atoms, 2.35).c0
    for l in lengths:
        assert math.isclose(scale_with_length(ref, atoms, l).c0, c_ref, rel_tol=1e-12)


@given(
    poles=st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=11, unique=True),
    tip=st.floats(-1e3, 1e3),
    g=st.floats(1e-2, 1e3),
)
def test_arrowhead_trace_and_interlacing(poles, tip, g):
    d = np.sort(np.array(poles))
    assume(np.all(np.diff(d) > 1e-6))
    ev = arrowhead_eigenvalues(tip, d, g)
    assert ev.size == d.size + 1
    assert np.all(ev[:-1] <= d) and np.all(d <= ev[1:])
    assert math.isclose(ev.sum(), tip + d.sum(), rel_tol=1e-10, abs_tol=1e-9 * (abs(tip) + np.abs(d).sum() + g))


@given(values=st.lists(st.floats(allow_nan=False, allow_infinity=False), min_size=1, max_size=30))
def test_csv_float_round_trip(tmp_path_factory, values):
    path = tmp_path_factory.mktemp("csv") / "v.csv"
    io.write_csv(path, ("v",), [values])
    back, _ = io.read_csv(path, ("v",))
    assert np.array_equal(back["v"], np.array(values))
