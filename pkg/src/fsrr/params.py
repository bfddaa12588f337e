"""Crisp controller inputs computed from a router's local view.

Everything here is a pure function of a :class:`RouterView` snapshot taken
when a route request arrives at a router.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional

from .geometry import Position, distance

NodeId = int


@dataclass(frozen=True)
class DestinationRecord:
    dest: NodeId
    last_loc: Position
    tmr: float
    v_max_d: float


@dataclass(frozen=True)
class NeighborInfo:
    node: NodeId
    pos: Position
    # largest timestamp of communication between this neighbor and the
    # destination, None if it never communicated with it
    c_jd: Optional[float] = None


@dataclass(frozen=True)
class RouterView:
    self_id: NodeId
    self_pos: Position
    now: float
    neighbors: tuple[NeighborInfo, ...]
    own_c_id: Optional[float]
    dest_record: Optional[DestinationRecord]
    v_net_max: float
    v_s: float
    area_diagonal: float


@dataclass(frozen=True)
class CdhtTerms:
    cls: frozenset
    tb: dict = field(hash=False)
    ast: float = 0.0
    ast_mn: float = 0.0
    f1: float = 0.0
    f2: float = 0.0
    f2_1: float = 0.0
    maxval: float = 0.0
    cdht: float = 0.0


def _clamp(x: float, lo: float, hi: float, counter: Optional[Counter], key: str) -> float:
    if x < lo or x > hi:
        if counter is not None:
            counter[key] += 1
        return min(max(x, lo), hi)
    return x


def compute_rtr(view: RouterView, counter: Optional[Counter] = None) -> float:
    if view.dest_record is None:
        raise ValueError("RTR needs a destination record")
    if view.now <= 0:
        return 1.0
    return _clamp(view.dest_record.tmr / view.now, 0.0, 1.0, counter, "rtr")


def compute_tb(c_i: Optional[float], c_j: float) -> float:
    """Time benefit of a neighbor over the router; a missing ``c_i`` counts as 0."""
    if c_j <= 0:
        raise ValueError("neighbor without a communication timestamp has no time benefit")
    c_i = 0.0 if c_i is None else c_i
    return min(1.0 - c_i / c_j, 1.0)


def compute_cdht_terms(view: RouterView, counter: Optional[Counter] = None) -> CdhtTerms:
    tb: dict[NodeId, float] = {}
    for nb in view.neighbors:
        if nb.c_jd is None or nb.c_jd <= 0:
            continue
        value = compute_tb(view.own_c_id, nb.c_jd)
        if value >= 0:
            tb[nb.node] = value
    if not tb:
        return CdhtTerms(cls=frozenset(), tb={})

    ast = max(tb.values())
    ast_mn = min(tb.values())
    f2_1 = ast - ast_mn
    f1 = len(tb) / len(view.neighbors)
    # summand uses TB rather than the raw timestamp so F2 stays in its stated range
    f2 = sum(v - ast_mn for v in tb.values()) / (f2_1 + 1.0)
    maxval = math.sqrt(f2_1 / (f2_1 + 1.0))
    cdht = _clamp(f1 * math.sqrt(f2 / len(tb)), 0.0, maxval, counter, "cdht")
    return CdhtTerms(
        cls=frozenset(tb),
        tb=tb,
        ast=ast,
        ast_mn=ast_mn,
        f1=f1,
        f2=f2,
        f2_1=f2_1,
        maxval=maxval,
        cdht=cdht,
    )


def compute_decr(view: RouterView, counter: Optional[Counter] = None) -> float:
    if view.dest_record is None:
        raise ValueError("DECR needs a destination record")
    if view.v_net_max <= 0:
        return 0.0
    return _clamp(view.dest_record.v_max_d / view.v_net_max, 0.0, 1.0, counter, "decr")


def compute_dr(view: RouterView, counter: Optional[Counter] = None) -> float:
    """Distance to the destination's last fix, normalised by the area diagonal."""
    if view.dest_record is None:
        raise ValueError("DR needs a destination record")
    d = distance(view.self_pos, view.dest_record.last_loc)
    return _clamp(d / view.area_diagonal, 0.0, 1.0, counter, "dr")
