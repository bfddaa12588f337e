"""Planar geometry for destination embedding circles.

A router that knows where a destination was at time ``t1`` can bound every
position the destination may occupy while a route request is still alive:
a circle around the last fix whose radius is the destination's top speed
times the request's remaining lifetime.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class Position:
    x: float
    y: float

    def __iter__(self):
        yield self.x
        yield self.y


@dataclass(frozen=True)
class Dec:
    """Destination embedding circle.

    ``expired`` is set by :func:`dec_build` when the request lifetime was
    already used up relative to the location fix; such circles have radius 0
    and the request should be dropped.
    """

    center: Position
    radius: float
    expired: bool = False


def distance(p: Position, q: Position) -> float:
    return math.hypot(p.x - q.x, p.y - q.y)


def remaining_budget(tau: float, t1: float, ts: float) -> float:
    """Time left for the request relative to the fix: ``tau - (t1 - ts)``.

    May be negative; callers clamp.
    """
    return tau - (t1 - ts)


def dec_build(last_loc: Position, v_max_d: float, tau: float, t1: float, ts: float) -> Dec:
    budget = remaining_budget(tau, t1, ts)
    if budget < 0:
        return Dec(last_loc, 0.0, expired=True)
    return Dec(last_loc, v_max_d * budget)


def dist_to_nearest_point(p: Position, dec: Dec) -> float:
    """Distance from ``p`` to the closed disc; 0 inside or on the boundary."""
    return max(0.0, distance(p, dec.center) - dec.radius)


def forward_eligible(
    neighbor_pos: Position, dec: Dec, v_s: float, tau: float, t1: float, ts: float
) -> bool:
    """True if a signal from ``neighbor_pos`` can reach the circle in time.

    The reach is ``v_s`` times the remaining budget (clamped at 0); the
    comparison is inclusive.
    """
    reach = v_s * max(0.0, remaining_budget(tau, t1, ts))
    return reach >= dist_to_nearest_point(neighbor_pos, dec)
