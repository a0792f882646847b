"""Risk-free clearing of standard and combinatorial option markets.

An exchange holding buy and sell limit orders on options looks for fill
fractions that earn the most immediate cash while never owing more than a
fixed amount ``L`` at expiry, whatever the underlying prices turn out to be.
Single-asset books are solved with one LP over the strike breakpoints;
books of options on linear combinations of assets use constraint
generation with an adversarial MILP.
"""

from __future__ import annotations

from .combo import (arrangement_vertices, brute_force_violation, build_lower_milp,
                    frontier_combinatorial,
                    build_upper_lp, lower_violation, match_combinatorial,
                    quote_combinatorial)
from .generators import (ChainQuote, GenConfig, GenerationError, HardnessConfig,
                         chain_market, cyclic_pair_set, derive_reference_price,
                         gen_synthetic_market,
                         gen_vertex_cover_instance, has_vertex_cover, synthetic_chain)
from .model import (BUY, CALL, PUT, SELL, AssetUniverse, ConstraintRecord, DomainError,
                    MarketInstance, MatchResult, OptionContract, Order, PriceVector,
                    ValidationError, call, normalize, payoff, put, validate_market)
from .standard import (ArbitrageError, build_standard_lp, compute_frontier,
                       implied_interest_rate, match_standard, quote_ask, quote_bid)

__version__ = "0.1.0"

__all__ = [
    "BUY", "CALL", "PUT", "SELL", "AssetUniverse", "ConstraintRecord", "DomainError",
    "MarketInstance", "MatchResult", "OptionContract", "Order", "PriceVector",
    "ValidationError", "call", "normalize", "payoff", "put", "validate_market",
    "ArbitrageError", "build_standard_lp", "compute_frontier", "implied_interest_rate",
    "match_standard", "quote_ask", "quote_bid",
    "arrangement_vertices", "brute_force_violation", "build_lower_milp", "build_upper_lp",
    "frontier_combinatorial", "lower_violation", "match_combinatorial",
    "quote_combinatorial",
    "ChainQuote", "GenConfig", "GenerationError", "HardnessConfig",
    "chain_market", "cyclic_pair_set", "derive_reference_price", "gen_synthetic_market",
    "gen_vertex_cover_instance", "has_vertex_cover", "synthetic_chain",
]
