from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import dis_market
from optclear.model import (BUY, CALL, PUT, SELL, AssetUniverse, ConstraintRecord,
                            MarketInstance, OptionContract, Order, PriceVector,
                            ValidationError, call, errors, normalize, payoff, put,
                            validate_market)


@pytest.mark.parametrize("contract, S, expected", [
    (call("SPX", 4500), {"SPX": 4700}, 200.0),
    (put("A", 100), {"A": 100}, 0.0),
    (call({"AAPL": 1, "MSFT": 3}, 300), {"AAPL": 250, "MSFT": 30}, 40.0),
    (put({"A": 2, "B": -1}, 50), {"A": 10, "B": 5}, 35.0),
    (OptionContract(PUT, {}, 7.5), {}, 7.5),
    (OptionContract(CALL, {}, 7.5), {}, 0.0),
])
def test_payoff_examples(contract, S, expected):
    assert payoff(contract, S) == pytest.approx(expected, abs=1e-12)


def test_payoff_accepts_price_vector():
    u = AssetUniverse(("AAPL", "MSFT"))
    S = PriceVector.from_mapping(u, {"AAPL": 250, "MSFT": 30})
    assert payoff(call({"AAPL": 1, "MSFT": 3}, 300), S) == pytest.approx(40.0)


def test_payoff_unknown_asset():
    with pytest.raises(ValidationError, match="unknown asset"):
        payoff(call("ZZZ", 1), {"A": 1.0})


def test_price_vector_rejects_negative():
    with pytest.raises(ValidationError):
        PriceVector(AssetUniverse(("A",)), [-1.0])


def test_normalize_examples():
    c = normalize(CALL, {"A": -2, "B": 1}, -50)
    assert c == OptionContract(PUT, {"A": 2, "B": -1}, 50)
    assert normalize(CALL, {"A": 1}, 100) == call("A", 100)


def test_normalize_identical_spread():
    a = normalize(CALL, {"MSFT": 1, "AAPL": -1}, 0)
    b = normalize(PUT, {"AAPL": 1, "MSFT": -1}, 0)
    for sa in np.linspace(0, 200, 21):
        for sm in np.linspace(0, 200, 21):
            S = {"AAPL": sa, "MSFT": sm}
            assert payoff(a, S) == payoff(b, S)


weights_st = st.dictionaries(st.sampled_from(["A", "B", "C"]),
                             st.integers(-9, 9).filter(bool).map(float), min_size=0, max_size=3)
prices_st = st.fixed_dictionaries({a: st.floats(0, 500, allow_nan=False) for a in "ABC"})


@settings(max_examples=200, deadline=None)
@given(st.sampled_from([CALL, PUT]), weights_st, st.floats(-500, 500, allow_nan=False), prices_st)
def test_normalize_preserves_payoff_and_is_idempotent(kind, weights, strike, S):
    c = normalize(kind, weights, strike)
    assert c.strike >= 0
    raw = OptionContract(kind, weights, 0.0)
    expected = max(raw.chi * (sum(w * S[a] for a, w in raw.weights) - strike), 0.0)
    assert payoff(c, S) == pytest.approx(expected, abs=1e-9)
    assert normalize(c.kind, c.weights, c.strike) == c


@settings(max_examples=200, deadline=None)
@given(st.sampled_from([CALL, PUT]), weights_st, st.floats(0, 500, allow_nan=False), prices_st,
       st.floats(0.01, 100, allow_nan=False))
def test_payoff_homogeneous(kind, weights, strike, S, c):
    base = payoff(OptionContract(kind, weights, strike), S)
    scaled = payoff(OptionContract(kind, weights, c * strike), {a: c * v for a, v in S.items()})
    assert scaled == pytest.approx(c * base, rel=1e-9, abs=1e-9)


@settings(max_examples=100, deadline=None)
@given(weights_st, st.floats(0, 500, allow_nan=False), prices_st, prices_st,
       st.floats(0, 1))
def test_call_payoff_convex_along_lines(weights, strike, S0, S1, t):
    c = call(weights, strike)
    mid = {a: (1 - t) * S0[a] + t * S1[a] for a in S0}
    assert payoff(c, mid) <= (1 - t) * payoff(c, S0) + t * payoff(c, S1) + 1e-9


def test_weights_canonical():
    c = OptionContract(CALL, {"B": 1, "A": 0, "C": 2}, 10)
    assert c.weights == (("B", 1.0), ("C", 2.0))
    assert c.assets == ("B", "C")


def test_universe_sorted_and_unique():
    m = MarketInstance.from_orders([Order("x", BUY, call({"MSFT": 1, "AAPL": 1}, 1), 1)])
    assert m.universe.assets == ("AAPL", "MSFT")
    with pytest.raises(ValidationError):
        AssetUniverse(("A", "A"))


def test_validate_ok():
    assert validate_market(dis_market()) == []


def test_validate_nonpositive_price():
    m = MarketInstance.from_orders([Order("x", BUY, call("A", 1), 0.0)])
    (v,) = validate_market(m)
    assert v.order_id == "x" and "nonpositive price" in v.message


def test_validate_unknown_asset():
    m = MarketInstance(AssetUniverse(("A",)), sells=(Order("x", SELL, call("B", 1), 1.0),))
    (v,) = validate_market(m)
    assert "unknown asset" in v.message


def test_validate_collects_everything():
    m = MarketInstance(AssetUniverse(("A",)), (
        Order("x", BUY, call("A", 1), 1.0, quantity=-1),
        Order("x", BUY, OptionContract(CALL, {"A": 1}, -3), 1.0),
        Order("y", BUY, call("A", 2e10), 1.0),
    ))
    msgs = [str(v) for v in validate_market(m)]
    assert any("nonpositive quantity" in s for s in msgs)
    assert any("duplicate order id" in s for s in msgs)
    assert any("negative strike" in s for s in msgs)
    assert [v.severity for v in validate_market(m) if "magnitude" in v.message] == ["warning"]
    assert len(errors(validate_market(m))) == 3


def test_side_arrays_and_records():
    m = dis_market()
    rec = ConstraintRecord.at(m, np.array([120.0]))
    np.testing.assert_allclose(rec.f, [10.0, 30.0])
    np.testing.assert_allclose(rec.g, [0.0, 0.0])
    ray = ConstraintRecord.along(m, np.array([1.0]))
    np.testing.assert_allclose(ray.f, [1.0, 0.0])
    np.testing.assert_allclose(ray.g, [1.0, 0.0])


def test_quantity_scales_payoffs():
    m = MarketInstance.from_orders([Order("x", BUY, call("A", 10), 1.0, quantity=3)])
    assert ConstraintRecord.at(m, [15.0]).f[0] == pytest.approx(15.0)


def test_with_orders_extends_universe():
    m = dis_market().with_orders(Order("t", BUY, call("ZZ", 1), 1.0))
    assert m.universe.assets == ("DIS", "ZZ")


def test_scaled():
    m = dis_market().scaled(3)
    assert m.get("b1").price == pytest.approx(21.6)
    assert m.get("b1").contract.strike == pytest.approx(330)
