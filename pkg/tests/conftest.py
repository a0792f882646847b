from __future__ import annotations

import numpy as np
import pytest

from optclear.model import (BUY, SELL, MarketInstance, OptionContract, Order, call, normalize,
                            put)

# Lines printed at the end of the session by the acceptance suite.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def dis_market() -> MarketInstance:
    """Four DIS orders that clear with a worst-case payout of 40."""
    return MarketInstance.from_orders([
        Order("b1", BUY, call("DIS", 110), 7.2),
        Order("b2", BUY, put("DIS", 150), 38.75),
        Order("s1", SELL, call("DIS", 150), 0.05),
        Order("s2", SELL, put("DIS", 110), 5.1),
    ])


def aapl_market() -> MarketInstance:
    """Four AAPL orders that clear with a guaranteed receipt of 80."""
    return MarketInstance.from_orders([
        Order("b1", BUY, call("AAPL", 160), 14.1),
        Order("b2", BUY, put("AAPL", 80), 0.62),
        Order("s1", SELL, call("AAPL", 80), 74.2),
        Order("s2", SELL, put("AAPL", 160), 19.1),
    ])


def combo_market() -> MarketInstance:
    """Two-asset book whose only match sells both baskets and buys both covers."""
    return MarketInstance.from_orders([
        Order("o1", BUY, call({"AAPL": 1, "MSFT": 2}, 300), 110),
        Order("o2", BUY, call({"AAPL": 1, "MSFT": 1}, 300), 70),
        Order("o3", SELL, call({"AAPL": 1, "MSFT": 3}, 300), 160),
        Order("o4", SELL, call("AAPL", 250), 5),
    ])


def batch_market() -> MarketInstance:
    """Three-asset book with a zero-profit match only visible as a batch."""
    return MarketInstance.from_orders([
        Order("o1", BUY, call({"A": 1, "B": 1}, 10), 6),
        Order("o2", BUY, call({"B": 1, "C": 1}, 7), 6),
        Order("o3", SELL, call({"A": 1, "B": 1, "C": 1}, 7), 10),
        Order("o4", SELL, call("B", 3), 2),
    ])


def random_single_asset_market(rng: np.random.Generator, n_orders: int = 6,
                               ticker: str = "X") -> MarketInstance:
    strikes = rng.choice(np.arange(60, 150, 10), size=n_orders)
    orders = []
    for i, k in enumerate(strikes):
        kind = "call" if rng.random() < 0.5 else "put"
        side = BUY if rng.random() < 0.5 else SELL
        price = round(float(rng.uniform(0.5, 40.0)), 2)
        qty = float(rng.choice([1.0, 1.0, 2.0]))
        orders.append(Order(f"o{i}", side, OptionContract(kind, {ticker: 1.0}, float(k)),
                            price, qty))
    return MarketInstance.from_orders(orders)


def random_combo_market(rng: np.random.Generator, U: int = 3, n_orders: int = 6):
    assets = [chr(ord("A") + i) for i in range(U)]
    orders = []
    for i in range(n_orders):
        k = int(rng.integers(1, min(U, 2) + 1))
        names = rng.choice(assets, size=k, replace=False)
        weights = {str(a): float(rng.choice([-2, -1, 1, 2, 3])) for a in names}
        strike = float(rng.integers(0, 20))
        kind = "call" if rng.random() < 0.5 else "put"
        side = BUY if rng.random() < 0.5 else SELL
        contract = normalize(kind, weights, strike if rng.random() < 0.8 else -strike)
        orders.append(Order(f"o{i}", side, contract, round(float(rng.uniform(0.5, 10)), 2)))
    return MarketInstance.from_orders(orders)


@pytest.fixture
def rng():
    return np.random.Generator(np.random.PCG64(12345))
