"""Core domain types for option markets: contracts, orders, markets, payoffs."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

CALL = "call"
PUT = "put"
BUY = "buy"
SELL = "sell"

# Comparison tolerance for data validation.
DATA_TOL = 1e-9
# Magnitudes above this are legal but flagged.
LARGE_MAGNITUDE = 1e9


class ValidationError(ValueError):
    """Raised when market data breaks a type invariant."""


class DomainError(ValueError):
    """Raised when an operation is applied outside its domain."""


def _canonical_weights(weights) -> tuple[tuple[str, float], ...]:
    if isinstance(weights, Mapping):
        items = weights.items()
    else:
        items = weights
    merged: dict[str, float] = {}
    for asset, w in items:
        merged[str(asset)] = merged.get(str(asset), 0.0) + float(w)
    return tuple(sorted((a, w) for a, w in merged.items() if w != 0.0))


@dataclass(frozen=True)
class AssetUniverse:
    """Ordered set of underlying asset identifiers."""

    assets: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "assets", tuple(str(a) for a in self.assets))
        if len(set(self.assets)) != len(self.assets):
            raise ValidationError(f"duplicate asset identifiers in {self.assets}")

    @classmethod
    def from_contracts(cls, contracts: Iterable["OptionContract"]) -> "AssetUniverse":
        names = set()
        for c in contracts:
            names.update(a for a, _ in c.weights)
        return cls(tuple(sorted(names)))

    @property
    def size(self) -> int:
        return len(self.assets)

    @cached_property
    def index(self) -> dict[str, int]:
        return {a: i for i, a in enumerate(self.assets)}

    def __contains__(self, asset) -> bool:
        return asset in self.index

    def __len__(self) -> int:
        return len(self.assets)


@dataclass(frozen=True)
class OptionContract:
    """A (possibly combinatorial) European option.

    Pays ``max{chi * (w.S - K), 0}`` with ``chi = +1`` for calls and ``-1``
    for puts. Weights are stored sparse as a sorted tuple of
    ``(asset, weight)`` pairs; an empty tuple is a constant-payoff contract.
    """

    kind: str
    weights: tuple[tuple[str, float], ...]
    strike: float

    def __post_init__(self):
        if self.kind not in (CALL, PUT):
            raise ValueError(f"kind must be 'call' or 'put', got {self.kind!r}")
        object.__setattr__(self, "weights", _canonical_weights(self.weights))
        object.__setattr__(self, "strike", float(self.strike))

    @property
    def chi(self) -> int:
        return 1 if self.kind == CALL else -1

    @property
    def weight_map(self) -> dict[str, float]:
        return dict(self.weights)

    @property
    def assets(self) -> tuple[str, ...]:
        return tuple(a for a, _ in self.weights)

    def dense_weights(self, universe: AssetUniverse) -> np.ndarray:
        w = np.zeros(universe.size)
        for asset, weight in self.weights:
            if asset not in universe:
                raise ValidationError(f"unknown asset {asset!r}")
            w[universe.index[asset]] = weight
        return w

    def __str__(self) -> str:
        legs = "".join(f"{w:+g}{a}" for a, w in self.weights).lstrip("+") or "0"
        return f"{'C' if self.kind == CALL else 'P'}({legs}, {self.strike:g})"


def call(weights, strike) -> OptionContract:
    """Shorthand for a call; ``weights`` may be a ticker for a standard option."""
    if isinstance(weights, str):
        weights = {weights: 1.0}
    return OptionContract(CALL, weights, strike)


def put(weights, strike) -> OptionContract:
    if isinstance(weights, str):
        weights = {weights: 1.0}
    return OptionContract(PUT, weights, strike)


def normalize(kind: str, weights, strike: float) -> OptionContract:
    """Rewrite a contract with a negative strike into its non-negative form.

    ``max{chi(w.S - K), 0} == max{-chi(-w.S + K), 0}``, so flipping the type
    and negating weights and strike leaves the payoff unchanged.
    """
    strike = float(strike)
    w = _canonical_weights(weights)
    if strike < 0:
        kind = PUT if kind == CALL else CALL
        w = tuple((a, -x) for a, x in w)
        strike = -strike
    return OptionContract(kind, w, strike)


@dataclass(frozen=True)
class Order:
    id: str
    side: str
    contract: OptionContract
    price: float
    quantity: float = 1.0

    def __post_init__(self):
        if self.side not in (BUY, SELL):
            raise ValueError(f"side must be 'buy' or 'sell', got {self.side!r}")
        object.__setattr__(self, "id", str(self.id))
        object.__setattr__(self, "price", float(self.price))
        object.__setattr__(self, "quantity", float(self.quantity))


@dataclass(frozen=True)
class PriceVector:
    """Values of every asset in ``universe`` at expiration."""

    universe: AssetUniverse
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).reshape(-1)
        if v.shape[0] != self.universe.size:
            raise ValidationError(
                f"price vector has {v.shape[0]} entries for {self.universe.size} assets")
        if not np.all(np.isfinite(v)) or np.any(v < 0):
            raise ValidationError("price vector entries must be finite and >= 0")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_mapping(cls, universe: AssetUniverse, prices: Mapping[str, float]):
        v = np.zeros(universe.size)
        for asset, value in prices.items():
            if asset not in universe:
                raise ValidationError(f"unknown asset {asset!r}")
            v[universe.index[asset]] = value
        return cls(universe, v)

    def __getitem__(self, asset: str) -> float:
        return float(self.values[self.universe.index[asset]])


def payoff(contract: OptionContract, S) -> float:
    """Payoff of one unit of ``contract`` when assets settle at ``S``.

    ``S`` is a :class:`PriceVector` or a plain mapping ``asset -> value``.
    """
    total = 0.0
    for asset, w in contract.weights:
        try:
            total += w * S[asset]
        except KeyError:
            raise ValidationError(f"unknown asset {asset!r}") from None
    return max(contract.chi * (total - contract.strike), 0.0)


@dataclass(frozen=True)
class SideArrays:
    """Dense view of one side of the book.

    ``chi`` (n,), ``W`` (n, U), ``K`` (n,), ``price`` (n,), ``qty`` (n,).
    """

    chi: np.ndarray
    W: np.ndarray
    K: np.ndarray
    price: np.ndarray
    qty: np.ndarray

    def __len__(self) -> int:
        return self.K.shape[0]

    def affine(self, S: np.ndarray) -> np.ndarray:
        """``qty * chi * (W S - K)`` for each price point (rows of ``S``)."""
        S = np.atleast_2d(S)
        return (S @ self.W.T - self.K) * (self.chi * self.qty)

    def payoffs(self, S: np.ndarray) -> np.ndarray:
        """Quantity-scaled payoffs, shape (points, orders)."""
        return np.maximum(self.affine(S), 0.0)


def _side_arrays(orders: Sequence[Order], universe: AssetUniverse) -> SideArrays:
    n, u = len(orders), universe.size
    W = np.zeros((n, u))
    for i, o in enumerate(orders):
        W[i] = o.contract.dense_weights(universe)
    arrays = SideArrays(
        chi=np.array([o.contract.chi for o in orders], dtype=float),
        W=W,
        K=np.array([o.contract.strike for o in orders], dtype=float),
        price=np.array([o.price for o in orders], dtype=float),
        qty=np.array([o.quantity for o in orders], dtype=float),
    )
    for a in (arrays.chi, arrays.W, arrays.K, arrays.price, arrays.qty):
        a.setflags(write=False)
    return arrays


@dataclass(frozen=True)
class MarketInstance:
    """All open buy and sell orders over a declared asset universe."""

    universe: AssetUniverse
    buys: tuple[Order, ...] = ()
    sells: tuple[Order, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "buys", tuple(self.buys))
        object.__setattr__(self, "sells", tuple(self.sells))

    @classmethod
    def from_orders(cls, orders: Iterable[Order], universe: AssetUniverse | None = None):
        orders = list(orders)
        if universe is None:
            universe = AssetUniverse.from_contracts(o.contract for o in orders)
        return cls(universe,
                   tuple(o for o in orders if o.side == BUY),
                   tuple(o for o in orders if o.side == SELL))

    @property
    def orders(self) -> tuple[Order, ...]:
        return self.buys + self.sells

    @property
    def M(self) -> int:
        return len(self.buys)

    @property
    def N(self) -> int:
        return len(self.sells)

    @cached_property
    def buy_arrays(self) -> SideArrays:
        return _side_arrays(self.buys, self.universe)

    @cached_property
    def sell_arrays(self) -> SideArrays:
        return _side_arrays(self.sells, self.universe)

    def get(self, order_id: str) -> Order:
        for o in self.orders:
            if o.id == order_id:
                return o
        raise KeyError(order_id)

    def without(self, *order_ids: str) -> "MarketInstance":
        drop = set(order_ids)
        return MarketInstance(self.universe,
                              tuple(o for o in self.buys if o.id not in drop),
                              tuple(o for o in self.sells if o.id not in drop))

    def restricted_to(self, order_ids) -> "MarketInstance":
        keep = set(order_ids)
        return MarketInstance(self.universe,
                              tuple(o for o in self.buys if o.id in keep),
                              tuple(o for o in self.sells if o.id in keep))

    def with_orders(self, *orders: Order) -> "MarketInstance":
        """Market with ``orders`` appended; new assets extend the universe at the end."""
        buys = self.buys + tuple(o for o in orders if o.side == BUY)
        sells = self.sells + tuple(o for o in orders if o.side == SELL)
        extra = sorted({a for o in orders for a in o.contract.assets} - set(self.universe.assets))
        universe = AssetUniverse(self.universe.assets + tuple(extra)) if extra else self.universe
        return MarketInstance(universe, buys, sells)

    def scaled(self, c: float) -> "MarketInstance":
        """Every price, strike and weight-free level scaled by ``c > 0``."""
        def scale(o):
            k = o.contract
            return Order(o.id, o.side, OptionContract(k.kind, k.weights, k.strike * c),
                         o.price * c, o.quantity)
        return MarketInstance(self.universe, tuple(map(scale, self.buys)),
                              tuple(map(scale, self.sells)))


@dataclass(frozen=True)
class Violation:
    order_id: str | None
    message: str
    severity: str = "error"

    def __str__(self) -> str:
        where = f"order {self.order_id}: " if self.order_id is not None else ""
        return f"{self.severity}: {where}{self.message}"


def validate_market(m: MarketInstance) -> list[Violation]:
    """Check every type invariant; returns all violations (empty means ok).

    Magnitudes above ``LARGE_MAGNITUDE`` are reported with severity
    ``"warning"``; everything else is an ``"error"``.
    """
    out: list[Violation] = []
    seen: set[str] = set()
    for o in m.orders:
        if o.id in seen:
            out.append(Violation(o.id, "duplicate order id"))
        seen.add(o.id)
        c = o.contract
        numbers = [o.price, o.quantity, c.strike] + [w for _, w in c.weights]
        if not all(math.isfinite(x) for x in numbers):
            out.append(Violation(o.id, "non-finite value"))
            continue
        if o.price <= 0:
            out.append(Violation(o.id, "nonpositive price"))
        if o.quantity <= 0:
            out.append(Violation(o.id, "nonpositive quantity"))
        if c.strike < 0:
            out.append(Violation(o.id, "negative strike (normalize the contract)"))
        for asset, _ in c.weights:
            if asset not in m.universe:
                out.append(Violation(o.id, f"unknown asset {asset!r}"))
        if any(abs(x) > LARGE_MAGNITUDE for x in numbers):
            out.append(Violation(o.id, "magnitude above 1e9", "warning"))
    for o in m.buys:
        if o.side != BUY:
            out.append(Violation(o.id, "sell order listed among buys"))
    for o in m.sells:
        if o.side != SELL:
            out.append(Violation(o.id, "buy order listed among sells"))
    return out


def errors(violations: Iterable[Violation]) -> list[Violation]:
    return [v for v in violations if v.severity == "error"]


@dataclass(frozen=True)
class ConstraintRecord:
    """Realized quantity-scaled payoffs ``(f, g)`` of both sides at a price point.

    ``kind == "point"`` encodes ``gamma.f - delta.g <= L``. ``kind == "ray"``
    stores slopes along the direction ``price_point`` and encodes
    ``gamma.f - delta.g <= 0`` (loss must not grow without bound).
    """

    price_point: np.ndarray
    f: np.ndarray
    g: np.ndarray
    kind: str = "point"

    @classmethod
    def at(cls, m: MarketInstance, S) -> "ConstraintRecord":
        S = np.asarray(S, dtype=float)
        return cls(S, m.buy_arrays.payoffs(S)[0], m.sell_arrays.payoffs(S)[0])

    @classmethod
    def along(cls, m: MarketInstance, d) -> "ConstraintRecord":
        """Slopes of each payoff along ``d`` as prices go to infinity."""
        d = np.asarray(d, dtype=float)
        b, s = m.buy_arrays, m.sell_arrays
        f = np.maximum((b.W @ d) * b.chi * b.qty, 0.0)
        g = np.maximum((s.W @ d) * s.chi * s.qty, 0.0)
        return cls(d, f, g, "ray")


@dataclass
class MatchResult:
    """Outcome of a clearing run.

    ``gamma``/``delta`` are fill fractions of each buy/sell order's quantity,
    ``offset_L`` the worst-case payout offset, ``objective`` the net profit
    ``b.gamma - a.delta - L`` in price units.
    """

    gamma: np.ndarray
    delta: np.ndarray
    offset_L: float
    objective: float
    buy_ids: tuple[str, ...] = ()
    sell_ids: tuple[str, ...] = ()
    iterations: int = 1
    constraints: list[ConstraintRecord] = field(default_factory=list)
    status: str = "optimal"
    diagnostics: dict = field(default_factory=dict)

    MATCH_TOL = 1e-6

    @property
    def matched(self) -> bool:
        return self.objective > self.MATCH_TOL

    @property
    def fills(self) -> dict[str, float]:
        out = {i: float(x) for i, x in zip(self.buy_ids, self.gamma)}
        out.update((i, float(x)) for i, x in zip(self.sell_ids, self.delta))
        return out

    def cash_flow(self, m: MarketInstance) -> float:
        """Premium received now: ``b.gamma - a.delta`` (quantity-scaled)."""
        b, s = m.buy_arrays, m.sell_arrays
        return float(b.price @ (b.qty * self.gamma) - s.price @ (s.qty * self.delta))
