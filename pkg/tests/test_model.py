import math

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from bouquet.address import ConstantTail, ExternalAddress, LinearTail, SIGNS, coordinate, linear_address, zero_address
from bouquet.model import (
    DivergedBeyond,
    FailsAt,
    Finite,
    ModelPoint,
    OkForever,
    OkUpTo,
    SaturationError,
    backward_sequence,
    big_f,
    big_f_inv,
    constant_offset_root,
    in_model_julia,
    min_potential,
    min_potential_oracle,
    model_step,
    potential_profile,
    t_star,
)

entries = st.integers(-20, 20)
tails = st.one_of(
    st.builds(ConstantTail, entries),
    st.builds(LinearTail, st.integers(1, 3), st.integers(-6, 6), st.sampled_from(SIGNS)),
)
addresses = st.builds(ExternalAddress, st.lists(entries, max_size=8).map(tuple), tails)


@given(st.floats(0, 700))
def test_inverse_pair(t):
    assert abs(big_f_inv(big_f(t)) - t) <= 1e-12 * (1 + t)


def test_big_f_domain():
    with pytest.raises(ValueError):
        big_f(-1.0)
    with pytest.raises(SaturationError):
        big_f(701.0)
    with pytest.raises(ValueError):
        ModelPoint(-0.5, zero_address())


def test_spot_values():
    assert min_potential(zero_address()).value == 0.0
    one = ExternalAddress((0, 1), ConstantTail(0))
    assert abs(min_potential(one).value - math.log1p(2 * math.pi)) <= 1e-12


def test_step():
    t, s = model_step(ModelPoint(2.0, linear_address([9, 1])))
    assert t == pytest.approx(math.expm1(2.0) - 2 * math.pi)
    assert s.coords(3) == [1, 2, 3]


@given(addresses)
def test_backward_sequence_is_nondecreasing(s):
    seq = backward_sequence(s, 40)
    assert all(b >= a for a, b in zip(seq, seq[1:]))


@settings(max_examples=60, deadline=None)
@given(addresses)
def test_matches_oracle(s):
    assert abs(min_potential(s).value - min_potential_oracle(s)) <= 1e-8


@given(addresses)
def test_tstar_bound(s):
    assert min_potential(s).value <= t_star(s).value + 1 + 1e-9


def test_linear_tail_value_frozen():
    # regression value, cross-checked against the bisection oracle when first computed
    s = linear_address([0], 1)
    assert min_potential(s).value == pytest.approx(2.312469148929338, abs=1e-12)
    assert min_potential(s).value <= t_star(s).value + 1


def test_feasibility_results():
    one = ExternalAddress((0, 1), ConstantTail(0))
    psi = min_potential(one).value
    assert in_model_julia(ModelPoint(psi - 1e-3, one), 10) == FailsAt(1)
    assert isinstance(in_model_julia(ModelPoint(psi + 0.1, one), 10), OkForever)
    assert in_model_julia(ModelPoint(0.0, zero_address()), 10) == OkForever(0)


def test_saturation_reports_last_verified_step():
    # t_1 is about 1150, but s_2 is too large for the dominance certificate
    s = ExternalAddress((0, 0, 10 ** 305), ConstantTail(0))
    t = min_potential(s).value + 0.5
    assert in_model_julia(ModelPoint(t, s), 50) == OkUpTo(1)


def _forward_never_fails(t, s, start, steps=6):
    # an independent high-precision forward run
    with mpmath.workdps(60):
        x = mpmath.mpf(t)
        for n in range(start + 1, start + steps + 1):
            x = mpmath.expm1(x) - 2 * mpmath.pi * abs(coordinate(s, n))
            if x < 0:
                return False
            if x > 1e6:
                return True
    return True


@settings(max_examples=80, deadline=None)
@given(addresses, st.floats(0, 40))
def test_forever_certificates_are_sound(s, t):
    res = in_model_julia(ModelPoint(t, s), 30)
    if isinstance(res, OkForever):
        n = res.certified_at
        tn = t
        for k in range(1, n + 1):
            tn = math.expm1(tn) - 2 * math.pi * abs(coordinate(s, k))
        assert _forward_never_fails(tn, s, n)


def test_constant_offset_root_is_an_upper_root():
    for c in (1, 3, 20):
        r = constant_offset_root(c)
        assert math.expm1(r) - r >= 2 * math.pi * c


def test_divergence_is_reported_beyond_cap():
    res = min_potential(linear_address([0, 10 ** 6]), cap=5.0)
    assert isinstance(res, DivergedBeyond) and res.lower_bound > 5.0
    assert not res.is_finite and res.value == math.inf
    assert min_potential_oracle(linear_address([0, 10 ** 6]), cap=5.0) == math.inf


def test_finite_result_fields():
    res = min_potential(linear_address([3, -2]))
    assert isinstance(res, Finite) and res.converged and res.error_bound <= 1e-11


@given(addresses)
def test_profile_matches_shifted_potentials(s):
    prof = potential_profile(s, 6)
    for j, v in enumerate(prof):
        assert v == pytest.approx(min_potential(s.shift(j)).value, abs=1e-11)


def test_zero_runs_do_not_fake_convergence():
    late = ExternalAddress((0, 0, 0, 0, 0, 0, 0, 100), ConstantTail(0))
    crossing = ExternalAddress((0, 0, 0), LinearTail(1, -3, "+"))
    for s in (late, crossing):
        v = min_potential(s).value
        assert v > 0
        assert abs(v - min_potential_oracle(s)) <= 1e-8


@given(st.lists(st.sampled_from([0, 0, 0, 1, 50]), max_size=12).map(tuple), st.integers(0, 3))
def test_sparse_prefixes_match_oracle(prefix, c):
    s = ExternalAddress(prefix, ConstantTail(c))
    assert abs(min_potential(s).value - min_potential_oracle(s)) <= 1e-8
