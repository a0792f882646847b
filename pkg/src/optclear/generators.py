"""Synthetic market generation.

* Combinatorial orders on asset pairs, priced off standard option chains by
  sub-/super-replication and then perturbed by a noise level ``eta``.
* Hardness instances from the vertex-cover construction: ``gamma = delta = 1``
  breaks the no-loss constraint exactly when the graph has a cover of size k.
* Black-Scholes option chains to calibrate against when no real quotes are at
  hand.

Randomness comes from numpy's PCG64 bit generator seeded with the config
seed. Each order consumes draws in a fixed order: pair, two weights, two
strikes, side, noise.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.stats import norm

from .combo import arrangement_vertices, market_hyperplanes, quote_combinatorial
from .model import (BUY, CALL, PUT, SELL, AssetUniverse, MarketInstance, OptionContract,
                    Order, ValidationError, normalize)

log = logging.getLogger(__name__)

WEIGHT_CHOICES = np.array([w for w in range(-9, 10) if w != 0])
MAX_RETRIES = 20


class GenerationError(RuntimeError):
    pass


@dataclass(frozen=True)
class ChainQuote:
    ticker: str
    kind: str
    strike: float
    best_bid: float
    best_ask: float

    def __post_init__(self):
        if self.kind not in (CALL, PUT):
            raise ValidationError(f"kind must be call or put, got {self.kind!r}")
        if not self.strike > 0:
            raise ValidationError(f"strike must be positive, got {self.strike}")
        if not 0 <= self.best_bid <= self.best_ask:
            raise ValidationError(
                f"crossed or negative quote bid={self.best_bid} ask={self.best_ask}")

    @property
    def contract(self) -> OptionContract:
        return OptionContract(self.kind, {self.ticker: 1.0}, self.strike)


@dataclass(frozen=True)
class GenConfig:
    universe: tuple[str, ...]
    n_orders: int
    noise: float = 2 ** -4
    seed: int = 0
    pair_set: tuple[tuple[str, str], ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "universe", tuple(self.universe))
        if len(self.universe) < 2:
            raise ValidationError("need at least two assets to form pairs")
        if self.noise < 0:
            raise ValidationError("noise must be >= 0")
        if self.n_orders < 0:
            raise ValidationError("n_orders must be >= 0")
        if self.pair_set is not None:
            pairs = tuple(tuple(p) for p in self.pair_set)
            object.__setattr__(self, "pair_set", pairs)
            covered = {a for p in pairs for a in p}
            if any(len(set(p)) != 2 for p in pairs):
                raise ValidationError("each pair needs two distinct assets")
            if not covered <= set(self.universe):
                raise ValidationError("pair set mentions assets outside the universe")
            if covered != set(self.universe):
                raise ValidationError("pair set must cover every asset")

    def pairs(self) -> list[tuple[str, str]]:
        if self.pair_set is not None:
            return list(self.pair_set)
        return list(itertools.combinations(self.universe, 2))


def cyclic_pair_set(assets: Sequence[str]) -> tuple[tuple[str, str], ...]:
    """``|P| = U`` pairs linking each asset to the next; covers every asset."""
    assets = list(assets)
    if len(assets) == 2:
        return ((assets[0], assets[1]),)
    return tuple((assets[i], assets[(i + 1) % len(assets)]) for i in range(len(assets)))


# ---------------------------------------------------------------------------
# chains
# ---------------------------------------------------------------------------

def black_scholes(kind: str, spot: float, strike: float, vol: float, t: float) -> float:
    """Zero-rate Black-Scholes price."""
    if t <= 0 or vol <= 0:
        intrinsic = spot - strike if kind == CALL else strike - spot
        return max(intrinsic, 0.0)
    sd = vol * math.sqrt(t)
    d1 = (math.log(spot / strike) + 0.5 * sd * sd) / sd
    d2 = d1 - sd
    if kind == CALL:
        return spot * norm.cdf(d1) - strike * norm.cdf(d2)
    return strike * norm.cdf(-d2) - spot * norm.cdf(-d1)


def synthetic_chain(spots: dict[str, float], seed: int = 0, n_strikes: int = 11,
                    width: float = 0.3, t: float = 30 / 365, vol: tuple = (0.2, 0.45),
                    rel_spread: float = 0.05, tick: float = 0.01) -> list[ChainQuote]:
    """Arbitrage-free bid/ask chain around Black-Scholes prices.

    Each ticker gets a random volatility in ``vol``; strikes are evenly
    spaced over ``spot * (1 +- width)``. Bids are rounded down and asks up to
    the tick, so every model price lies inside its quote.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    out = []
    for ticker in sorted(spots):
        spot = float(spots[ticker])
        sigma = rng.uniform(*vol)
        step = max(round(2 * width * spot / max(n_strikes - 1, 1)), 1)
        center = round(spot / step) * step
        half = n_strikes // 2
        strikes = [center + step * (i - half) for i in range(n_strikes)]
        for k in strikes:
            if k <= 0:
                continue
            for kind in (CALL, PUT):
                p = black_scholes(kind, spot, k, sigma, t)
                half_spread = max(tick, rel_spread * p)
                bid = math.floor(max(p - half_spread, 0.0) / tick) * tick
                ask = math.ceil((p + half_spread) / tick) * tick
                out.append(ChainQuote(ticker, kind, float(k), round(bid, 10), round(ask, 10)))
    return out


def chain_market(chains: Sequence[ChainQuote], universe: AssetUniverse | None = None,
                 tickers=None) -> MarketInstance:
    """Book with one unit buy order per positive bid and one sell per ask."""
    if tickers is not None:
        keep = set(tickers)
        chains = [q for q in chains if q.ticker in keep]
    if universe is None:
        universe = AssetUniverse(tuple(sorted({q.ticker for q in chains})))
    orders = []
    for q in chains:
        tag = f"{q.ticker}-{'C' if q.kind == CALL else 'P'}{q.strike:g}"
        if q.best_bid > 0:
            orders.append(Order(f"{tag}-bid", BUY, q.contract, q.best_bid))
        if q.best_ask > 0:
            orders.append(Order(f"{tag}-ask", SELL, q.contract, q.best_ask))
    return MarketInstance.from_orders(orders, universe)


def strikes_by_ticker(chains: Sequence[ChainQuote]) -> dict[str, np.ndarray]:
    out: dict[str, set] = {}
    for q in chains:
        out.setdefault(q.ticker, set()).add(q.strike)
    return {t: np.array(sorted(v)) for t, v in out.items()}


def derive_reference_price(chains: Sequence[ChainQuote], contract: OptionContract,
                           side: str, **kwargs) -> float:
    """Price ``contract`` off standard options in ``chains``.

    ``side="buy"`` gives the largest gain from selling chain options the
    contract dominates (a bid); ``side="sell"`` the cheapest chain portfolio
    dominating it (an ask, ``inf`` if none). Only chains on the contract's
    own assets are used. The arrangement vertices of the relevant payoff
    kinks seed the constraint set, so the lower search usually confirms
    optimality in one round.
    """
    assets = sorted(contract.assets)
    universe = AssetUniverse(tuple(assets))
    book = chain_market(chains, universe=universe, tickers=assets)
    W, K = market_hyperplanes(book)
    w = contract.dense_weights(universe)
    W = np.vstack([W, w]) if W.size else w[None, :]
    K = np.append(K, contract.strike)
    seeds = arrangement_vertices(W, K, universe.size) if universe.size else None
    return quote_combinatorial(book, contract, side, seed_points=seeds, **kwargs)


def reduce_weights(wi: int, wj: int) -> tuple[int, int]:
    """Divide a weight pair by its gcd so the two are relatively prime."""
    g = math.gcd(int(wi), int(wj))
    return int(wi) // g, int(wj) // g


def _draw_order(rng, pairs, strikes):
    i, j = pairs[rng.integers(len(pairs))]
    wi, wj = reduce_weights(*WEIGHT_CHOICES[rng.integers(len(WEIGHT_CHOICES), size=2)])
    ki = strikes[i][rng.integers(len(strikes[i]))]
    kj = strikes[j][rng.integers(len(strikes[j]))]
    side = BUY if rng.integers(2) == 0 else SELL
    u = rng.random()
    contract = normalize(CALL, {i: wi, j: wj}, wi * ki + wj * kj)
    return contract, side, u


def gen_synthetic_market(chains: Sequence[ChainQuote], cfg: GenConfig,
                         cache: dict | None = None, **quote_kwargs) -> MarketInstance:
    """Combinatorial two-asset orders priced from ``chains`` plus noise.

    Buys are priced ``b(1 + zeta)`` and sells ``a(1 - zeta)`` with
    ``zeta ~ U[0, noise]``, where ``b``/``a`` are the reference prices.
    ``cache`` (contract, side) -> price may be shared across calls; the
    stream of contracts depends on the seed only, not on ``noise``.
    """
    strikes = strikes_by_ticker(chains)
    missing = [a for a in cfg.universe if a not in strikes]
    if missing:
        raise GenerationError(f"no chain strikes for {missing}")
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    pairs = cfg.pairs()
    cache = {} if cache is None else cache
    orders = []
    for n in range(cfg.n_orders):
        for _ in range(MAX_RETRIES):
            contract, side, u = _draw_order(rng, pairs, strikes)
            key = (contract, side)
            if key not in cache:
                cache[key] = derive_reference_price(chains, contract, side, **quote_kwargs)
            ref = cache[key]
            if math.isfinite(ref) and ref > 0:
                break
        else:
            raise GenerationError(f"could not price order {n} after {MAX_RETRIES} draws")
        zeta = cfg.noise * u
        price = ref * (1 + zeta) if side == BUY else ref * (1 - zeta)
        if price <= 0:
            price = ref
        orders.append(Order(f"o{n}", side, contract, price))
    return MarketInstance.from_orders(orders, AssetUniverse(tuple(sorted(cfg.universe))))


# ---------------------------------------------------------------------------
# vertex-cover hardness instances
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HardnessConfig:
    vertices: tuple
    edges: tuple
    k: int
    L: float = 0.0

    def __post_init__(self):
        verts = tuple(str(v) for v in self.vertices)
        edges = tuple((str(a), str(b)) for a, b in self.edges)
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "edges", edges)
        if len(set(verts)) != len(verts):
            raise ValidationError("duplicate vertices")
        seen = set()
        for a, b in edges:
            if a == b:
                raise ValidationError(f"self loop at {a}")
            if a not in verts or b not in verts:
                raise ValidationError(f"edge ({a}, {b}) uses an unknown vertex")
            key = frozenset((a, b))
            if key in seen:
                raise ValidationError(f"duplicate edge ({a}, {b})")
            seen.add(key)
        if int(self.k) != self.k or self.k < 0:
            raise ValidationError("k must be a non-negative integer")
        if not len(edges) - self.k - self.L - 0.5 > 0:
            raise ValidationError("construction needs |E| - k - L - 0.5 > 0")

    @property
    def constant_payoff(self) -> float:
        return len(self.edges) - self.k - self.L - 0.5


def gen_vertex_cover_instance(cfg: HardnessConfig):
    """Market whose all-ones fill violates the no-loss constraint iff ``cfg.graph``
    has a vertex cover of size ``cfg.k``.

    Returns ``(market, gamma, delta)`` with all-ones fills. Prices are set to
    1; only the payoffs matter for the decision question.
    """
    E = len(cfg.edges)
    K1, K2 = 10.0 * E, 100.0 * E
    buys, sells = [], []
    for v in cfg.vertices:
        buys.append(Order(f"f_{v}", BUY, OptionContract(CALL, {v: 2 * K1}, K1), 1.0))
        sells.append(Order(f"g1_{v}", SELL, OptionContract(CALL, {v: K1}, 0.0), 1.0))
        sells.append(Order(f"g2_{v}", SELL, OptionContract(CALL, {v: K2}, K2), 1.0))
        sells.append(Order(f"g3_{v}", SELL, OptionContract(CALL, {v: 1.0}, 0.0), 1.0))
    for a, b in cfg.edges:
        buys.append(Order(f"fe_{a}_{b}", BUY, OptionContract(CALL, {a: 1.0, b: 1.0}, 0.0), 1.0))
        sells.append(Order(f"ge_{a}_{b}", SELL, OptionContract(CALL, {a: 1.0, b: 1.0}, 1.0), 1.0))
    # Zero weights: pays max{-(0 - c), 0} = c everywhere.
    sells.append(Order("gstar", SELL, OptionContract(PUT, {}, cfg.constant_payoff), 1.0))
    m = MarketInstance(AssetUniverse(cfg.vertices), tuple(buys), tuple(sells))
    return m, np.ones(m.M), np.ones(m.N)


def has_vertex_cover(vertices, edges, k: int) -> bool:
    """Exhaustive check for a cover with at most ``k`` vertices."""
    vertices = list(vertices)
    edges = [tuple(e) for e in edges]
    for size in range(0, min(k, len(vertices)) + 1):
        for subset in itertools.combinations(vertices, size):
            chosen = set(subset)
            if all(a in chosen or b in chosen for a, b in edges):
                return True
    return False


def cover_indicator(cfg: HardnessConfig, cover) -> np.ndarray:
    chosen = {str(v) for v in cover}
    return np.array([1.0 if v in chosen else 0.0 for v in cfg.vertices])
