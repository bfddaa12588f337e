"""Random waypoint and random walk mobility on a rectangular area."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np


@dataclass
class MobilityState:
    pos: np.ndarray  # (n, 2) metres
    vel: np.ndarray  # (n, 2) metres/second
    v_max: np.ndarray  # (n,) per-node speed cap
    waypoint: np.ndarray  # (n, 2), random waypoint only
    epoch_left: np.ndarray  # (n,), random walk only
    area_w: float
    area_h: float
    walk_epoch: float = 5.0

    @property
    def n(self) -> int:
        return len(self.v_max)


def _draw_speed(rng: np.random.Generator, v_max: float) -> float:
    # uniform on (0, v_max]
    return v_max * (1.0 - rng.random())


def init_mobility(
    n: int,
    area_w: float,
    area_h: float,
    v_max: np.ndarray,
    model: str,
    rng: np.random.Generator,
    walk_epoch: float = 5.0,
    positions: Optional[np.ndarray] = None,
) -> MobilityState:
    if positions is None:
        pos = np.column_stack([rng.uniform(0, area_w, n), rng.uniform(0, area_h, n)])
    else:
        pos = np.array(positions, dtype=float).reshape(n, 2)
    state = MobilityState(
        pos=pos,
        vel=np.zeros((n, 2)),
        v_max=np.asarray(v_max, dtype=float),
        waypoint=pos.copy(),
        epoch_left=np.zeros(n),
        area_w=area_w,
        area_h=area_h,
        walk_epoch=walk_epoch,
    )
    for i in range(n):
        if state.v_max[i] > 0:
            if model == "random_waypoint":
                _new_waypoint(state, i, rng)
            else:
                _new_heading(state, i, rng)
    return state


def _new_waypoint(state: MobilityState, i: int, rng: np.random.Generator) -> None:
    state.waypoint[i] = (rng.uniform(0, state.area_w), rng.uniform(0, state.area_h))
    speed = _draw_speed(rng, state.v_max[i])
    d = state.waypoint[i] - state.pos[i]
    norm = float(np.hypot(*d))
    state.vel[i] = d / norm * speed if norm > 0 else 0.0


def _new_heading(state: MobilityState, i: int, rng: np.random.Generator) -> None:
    heading = rng.uniform(0, 2 * np.pi)
    speed = _draw_speed(rng, state.v_max[i])
    state.vel[i] = (speed * np.cos(heading), speed * np.sin(heading))
    state.epoch_left[i] = state.walk_epoch


def _reflect(x: np.ndarray, v: np.ndarray, hi: float) -> None:
    low = x < 0
    x[low] = -x[low]
    v[low] = -v[low]
    high = x > hi
    x[high] = 2 * hi - x[high]
    v[high] = -v[high]
    np.clip(x, 0, hi, out=x)


def step_mobility(state: MobilityState, dt: float, model: str, rng: np.random.Generator) -> None:
    """Advance every node by ``dt`` seconds in place.

    Random draws happen in node-index order so trajectories depend only on
    the generator state, never on packet traffic.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    moving = state.v_max > 0
    if model == "random_waypoint":
        d = state.waypoint - state.pos
        dist = np.hypot(d[:, 0], d[:, 1])
        step = np.hypot(state.vel[:, 0], state.vel[:, 1]) * dt
        arrived = moving & (dist <= step)
        travelling = moving & ~arrived
        state.pos[travelling] += state.vel[travelling] * dt
        for i in np.flatnonzero(arrived):
            state.pos[i] = state.waypoint[i]
            _new_waypoint(state, i, rng)
    elif model == "random_walk":
        state.epoch_left[moving] -= dt
        for i in np.flatnonzero(moving & (state.epoch_left <= 0)):
            _new_heading(state, i, rng)
        state.pos[moving] += state.vel[moving] * dt
        _reflect(state.pos[:, 0], state.vel[:, 0], state.area_w)
        _reflect(state.pos[:, 1], state.vel[:, 1], state.area_h)
    else:
        raise ValueError(f"unknown mobility model {model!r}")


def neighbor_table(pos: np.ndarray, tx_range: float) -> list[tuple[int, ...]]:
    """Unit-disk neighbours: ``j`` hears ``i`` iff their distance is <= tx_range."""
    diff = pos[:, None, :] - pos[None, :, :]
    d2 = np.einsum("ijk,ijk->ij", diff, diff)
    adj = d2 <= tx_range * tx_range
    np.fill_diagonal(adj, False)
    return [tuple(np.flatnonzero(row).tolist()) for row in adj]
