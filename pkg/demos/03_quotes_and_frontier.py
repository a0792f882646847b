"""Best bid and ask for any contract, and the orders that set them.

A quote is the best price at which the contract can be bought or sold
against a portfolio of resting orders without risk. The frontier is the
set of orders no combination of the others beats on price; marginal
quotes against the frontier alone equal quotes against the full book.
"""

from __future__ import annotations

from pathlib import Path

from optclear import (call, chain_market, compute_frontier, put, quote_ask, quote_bid,
                      quote_combinatorial)
from optclear.formats import parse_chain, parse_orders

DATA = Path(__file__).parent / "data"

chains = parse_chain(DATA / "chain.csv")
book = chain_market(chains, tickers=["DIS"])
print(f"== DIS chain: {len(book.orders)} resting orders")
for c in (call("DIS", 95), put("DIS", 85), call("DIS", 101.5)):
    print(f"   {str(c):16s} bid {quote_bid(book, c):7.3f}  ask {quote_ask(book, c):7.3f}")

front = compute_frontier(book)
print(f"\n   frontier keeps {len(front)} of {len(book.orders)} orders")
sub = book.restricted_to(front)
c = call("DIS", 97)
print(f"   {c}: instantaneous ask, full book {quote_ask(book, c, instantaneous=True):.4f}, "
      f"frontier only {quote_ask(sub, c, instantaneous=True):.4f}")

dis = parse_orders(DATA / "dis_positive_L.csv").without("b1")
c110 = call("DIS", 110)
print(f"\n== DIS four-order book minus the C110 bid: C110 ask {quote_ask(dis, c110):.2f} "
      "(replicated by P110 + C150 - P150 + 40)")

pair = chain_market(chains, tickers=["AAPL", "MSFT"])
basket = call({"AAPL": 1, "MSFT": 1}, 250)
print(f"\n== basket {basket} against the AAPL and MSFT chains")
print(f"   bid {quote_combinatorial(pair, basket, 'buy'):.3f}  "
      f"ask {quote_combinatorial(pair, basket, 'sell'):.3f}")
