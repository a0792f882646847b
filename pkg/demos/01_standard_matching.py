"""Clearing single-underlying option books.

Two four-order books on one stock. The first matches with a worst-case
payout of 40 at expiry, the second with a guaranteed receipt of 80, which
prices an implied interest rate.
"""

from __future__ import annotations

from pathlib import Path

from optclear import implied_interest_rate, match_standard
from optclear.formats import parse_orders

DATA = Path(__file__).parent / "data"


def show(title, m, res):
    print(f"== {title}")
    for o in m.orders:
        print(f"   {o.side:4s} {str(o.contract):16s} @ {o.price:7.2f}  fill {res.fills[o.id]:.3f}")
    print(f"   profit {res.objective:.4f}   L {res.offset_L:+.4f}\n")


dis = parse_orders(DATA / "dis_positive_L.csv")
show("DIS book (exchange pays at most L at expiry)", dis, match_standard(dis))
show("same book with L pinned to 0", dis, match_standard(dis, fix_L_zero=True))

aapl = parse_orders(DATA / "aapl_negative_L.csv")
res = match_standard(aapl)
show("AAPL book (negative L: a guaranteed receipt)", aapl, res)
rate = implied_interest_rate(res, 359 / 365, market=aapl)
print(f"outlay today {-res.cash_flow(aapl):.2f} grows to {-res.offset_L:.0f} "
      f"in 359 days: r = {100 * rate:.2f}% (continuous)")
