"""CSV order books and option chains, and JSON match reports.

Orders: ``id,side,kind,legs,strike,price,qty`` where ``legs`` is a
semicolon-joined list of ``TICKER:weight`` pairs (empty for a constant
payoff). Chains: ``ticker,kind,strike,bid,ask``.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, TextIO

from .generators import ChainQuote
from .model import (BUY, CALL, PUT, SELL, AssetUniverse, MarketInstance, MatchResult,
                    Order, ValidationError, errors, normalize, validate_market)

log = logging.getLogger(__name__)

ORDER_COLUMNS = ("id", "side", "kind", "legs", "strike", "price", "qty")
CHAIN_COLUMNS = ("ticker", "kind", "strike", "bid", "ask")
MONEY_DP = 6


class ParseError(ValueError):
    """Malformed input file; the message cites the offending line."""


def _num(x: float) -> str:
    """Shortest text that reads back as exactly ``x``."""
    x = float(x)
    return str(int(x)) if x.is_integer() and abs(x) < 1e15 else repr(x)


def _float(text: str, what: str, line: int) -> float:
    try:
        return float(text)
    except (TypeError, ValueError):
        raise ParseError(f"line {line}: bad {what} {text!r}") from None


def _open_text(source) -> TextIO:
    if isinstance(source, (str, Path)):
        return open(source, newline="")
    return source


def _rows(source, columns, kind):
    """Yield ``(line_number, row dict)`` after checking the header."""
    fh = _open_text(source)
    try:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ParseError(f"{kind} file is empty (expected header {','.join(columns)})")
        header = [h.strip() for h in header]
        if tuple(header) != columns:
            raise ParseError(f"line 1: expected header {','.join(columns)}, got {','.join(header)}")
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(columns):
                raise ParseError(f"line {line}: expected {len(columns)} fields, got {len(row)}")
            yield line, dict(zip(columns, (c.strip() for c in row)))
    finally:
        if fh is not source:
            fh.close()


def parse_legs(text: str, line: int = 0) -> dict[str, float]:
    legs: dict[str, float] = {}
    if not text:
        return legs
    for part in text.split(";"):
        ticker, sep, weight = part.partition(":")
        ticker = ticker.strip()
        if not sep or not ticker:
            raise ParseError(f"line {line}: bad leg {part!r} (expected TICKER:weight)")
        if ticker in legs:
            raise ParseError(f"line {line}: ticker {ticker!r} appears twice in legs")
        legs[ticker] = _float(weight, "leg weight", line)
    return legs


def format_legs(weights) -> str:
    return ";".join(f"{a}:{_num(w)}" for a, w in weights)


def parse_orders(source, universe: AssetUniverse | None = None) -> MarketInstance:
    """Read an order CSV into a validated market.

    Contracts are normalized on load (a negative strike flips the type).
    Any validation error aborts with the line numbers of the bad orders.
    """
    orders, lines = [], {}
    for line, row in _rows(source, ORDER_COLUMNS, "order"):
        if row["side"] not in (BUY, SELL):
            raise ParseError(f"line {line}: side must be buy or sell, got {row['side']!r}")
        if row["kind"] not in (CALL, PUT):
            raise ParseError(f"line {line}: kind must be call or put, got {row['kind']!r}")
        contract = normalize(row["kind"], parse_legs(row["legs"], line),
                             _float(row["strike"], "strike", line))
        qty = _float(row["qty"], "qty", line) if row["qty"] else 1.0
        orders.append(Order(row["id"], row["side"], contract,
                            _float(row["price"], "price", line), qty))
        lines.setdefault(row["id"], line)
    m = MarketInstance.from_orders(orders, universe)
    problems = validate_market(m)
    for v in problems:
        if v.severity != "error":
            log.warning("line %s: %s", lines.get(v.order_id, "?"), v)
    bad = errors(problems)
    if bad:
        msg = "; ".join(f"line {lines.get(v.order_id, '?')}: {v}" for v in bad)
        raise ValidationError(msg)
    return m


def write_orders(m_or_orders, dest=None) -> str | None:
    """Write orders as CSV. Returns the text when ``dest`` is None."""
    orders = m_or_orders.orders if isinstance(m_or_orders, MarketInstance) else m_or_orders
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(ORDER_COLUMNS)
    for o in orders:
        c = o.contract
        w.writerow([o.id, o.side, c.kind, format_legs(c.weights), _num(c.strike),
                    _num(o.price), _num(o.quantity)])
    text = buf.getvalue()
    if dest is None:
        return text
    if isinstance(dest, (str, Path)):
        Path(dest).write_text(text)
    else:
        dest.write(text)
    return None


def parse_chain(source) -> list[ChainQuote]:
    """Read a chain CSV. Crossed rows are fatal; a repeated contract keeps the last row."""
    quotes: dict[tuple, ChainQuote] = {}
    for line, row in _rows(source, CHAIN_COLUMNS, "chain"):
        if row["kind"] not in (CALL, PUT):
            raise ParseError(f"line {line}: kind must be call or put, got {row['kind']!r}")
        strike = _float(row["strike"], "strike", line)
        bid, ask = _float(row["bid"], "bid", line), _float(row["ask"], "ask", line)
        if bid > ask:
            raise ParseError(f"line {line}: bid {bid} exceeds ask {ask}")
        try:
            q = ChainQuote(row["ticker"], row["kind"], strike, bid, ask)
        except ValidationError as e:
            raise ParseError(f"line {line}: {e}") from None
        key = (q.ticker, q.kind, q.strike)
        if key in quotes:
            log.warning("line %d: duplicate quote for %s %s %g; keeping this one",
                        line, *key)
            del quotes[key]
        quotes[key] = q
    return list(quotes.values())


def write_chain(quotes: Iterable[ChainQuote], dest=None) -> str | None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CHAIN_COLUMNS)
    for q in quotes:
        w.writerow([q.ticker, q.kind, _num(q.strike), _num(q.best_bid), _num(q.best_ask)])
    text = buf.getvalue()
    if dest is None:
        return text
    Path(dest).write_text(text)
    return None


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------

def _money(x: float) -> float | None:
    if x is None or not math.isfinite(x):
        return None
    return round(float(x), MONEY_DP) + 0.0


@dataclass
class MatchReport:
    """Serializable summary of one clearing run.

    Monetary values are rounded to 6 decimals when the report is built, so
    ``from_json(to_json())`` reproduces it exactly. Non-finite values
    become ``null``.
    """

    market_id: str
    objective: float | None
    L: float | None
    fills: dict[str, float]
    iterations: int
    constraint_count: int
    wall_time: float
    statuses: dict[str, str] = field(default_factory=dict)
    mode: str = "standard"
    seed: int | None = None

    @classmethod
    def from_match(cls, market_id: str, res: MatchResult, wall_time: float,
                   mode: str = "standard", seed: int | None = None,
                   **statuses) -> "MatchReport":
        fills = {k: min(max(round(v, 9), 0.0), 1.0) + 0.0 for k, v in res.fills.items()}
        return cls(market_id, _money(res.objective), _money(res.offset_L), fills,
                   int(res.iterations), len(res.constraints), round(wall_time, 6),
                   {"match": res.status, **{k: str(v) for k, v in statuses.items()}}, mode,
                   seed)

    @property
    def matched(self) -> bool:
        return self.objective is not None and self.objective > MatchResult.MATCH_TOL

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    @classmethod
    def from_dict(cls, d: dict) -> "MatchReport":
        return cls(**d)

    @classmethod
    def from_json(cls, text: str) -> "MatchReport":
        return cls.from_dict(json.loads(text))
