"""Per-router route-request queue and forward cache.

Two service disciplines drain the same queue:

* ``dequeue_next``: requests whose destination has a known location come
  first, ordered by delay grade (d first), then arrival time, then request
  id. Requests with unknown destinations follow in arrival order.
* ``fcfs_dequeue_next``: arrival time, then request id, grades ignored.
"""

from __future__ import annotations

import heapq
import logging
from collections import Counter
from dataclasses import dataclass
from typing import Optional

from . import fuzzy, params
from .fuzzy import ControllerTrace, Grade
from .geometry import Position
from .params import DestinationRecord, NodeId, RouterView

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class RouteRequest:
    req_id: int
    source: NodeId
    dest: NodeId
    origin_time: float
    tau: float
    path: tuple[NodeId, ...]
    carried_dest_record: Optional[DestinationRecord] = None
    # where the source was when it originated the request
    source_loc: Optional[Position] = None

    @property
    def deadline(self) -> float:
        return self.origin_time + self.tau

    def expired_at(self, t: float) -> bool:
        return t > self.deadline


@dataclass(frozen=True)
class QueueEntry:
    request: RouteRequest
    arrival_time: float
    grade: Optional[Grade] = None  # None: destination location unknown
    trace: Optional[ControllerTrace] = None

    @property
    def known(self) -> bool:
        return self.grade is not None

    def fsrr_key(self) -> tuple:
        if self.grade is None:
            return (1, 0, self.arrival_time, self.request.req_id)
        return (0, -int(self.grade), self.arrival_time, self.request.req_id)

    def fcfs_key(self) -> tuple:
        return (self.arrival_time, self.request.req_id)


@dataclass
class ForwardCacheEntry:
    source: NodeId
    rreq_count: int
    first_forward_time: float


@dataclass
class QueueStats:
    received: int = 0
    enqueued: int = 0
    dequeued: int = 0
    dropped_duplicate: int = 0
    dropped_expired: int = 0
    total_wait: float = 0.0
    max_wait: float = 0.0

    @property
    def mean_wait(self) -> float:
        return self.total_wait / self.dequeued if self.dequeued else 0.0


def grade_on_arrival(
    request: RouteRequest, view: RouterView, counter: Optional[Counter] = None
) -> QueueEntry:
    """Run both controllers and the scheduler table for an arriving request."""
    if view.dest_record is None:
        return QueueEntry(request, view.now)
    terms = params.compute_cdht_terms(view, counter)
    rtr = params.compute_rtr(view, counter)
    decr = params.compute_decr(view, counter)
    dr = params.compute_dr(view, counter)
    trace = fuzzy.evaluate(rtr, terms.ast, terms.cdht, terms.maxval, decr, dr, counter)
    if log.isEnabledFor(logging.DEBUG):
        log.debug(
            "t=%.4f router=%s req=%s rtr=%.4f ast=%.4f cdht=%.4f maxval=%.4f decr=%.4f dr=%.4f delay=%s",
            view.now, view.self_id, request.req_id, rtr, terms.ast, terms.cdht, terms.maxval,
            decr, dr, trace.delay,
        )
    return QueueEntry(request, view.now, trace.delay, trace)


class RreqQueue:
    """Route-request buffer for one router.

    Entries live in two lazily-pruned heaps so either discipline can drain
    the queue in O(log n) per request.
    """

    def __init__(self) -> None:
        self._live: dict[int, QueueEntry] = {}
        self._fsrr_heap: list[tuple] = []
        self._fcfs_heap: list[tuple] = []
        self._seen: set[int] = set()
        self.stats = QueueStats()
        self.forward_cache: dict[NodeId, ForwardCacheEntry] = {}

    def __len__(self) -> int:
        return len(self._live)

    def seen(self, req_id: int) -> bool:
        return req_id in self._seen

    def enqueue(self, entry: QueueEntry) -> bool:
        """Store ``entry``; returns False if it was dropped as a duplicate or expired."""
        req = entry.request
        self.stats.received += 1
        if req.req_id in self._seen:
            self.stats.dropped_duplicate += 1
            return False
        self._seen.add(req.req_id)
        if req.expired_at(entry.arrival_time):
            self.stats.dropped_expired += 1
            return False
        self._live[req.req_id] = entry
        heapq.heappush(self._fsrr_heap, (entry.fsrr_key(), req.req_id))
        heapq.heappush(self._fcfs_heap, (entry.fcfs_key(), req.req_id))
        self.stats.enqueued += 1
        return True

    def _pop(self, heap: list[tuple], now: float) -> Optional[QueueEntry]:
        while heap:
            _, req_id = heapq.heappop(heap)
            entry = self._live.pop(req_id, None)
            if entry is None:
                continue  # already removed through the other heap
            if entry.request.expired_at(now):
                self.stats.dropped_expired += 1
                continue
            wait = now - entry.arrival_time
            self.stats.dequeued += 1
            self.stats.total_wait += wait
            self.stats.max_wait = max(self.stats.max_wait, wait)
            return entry
        return None

    def dequeue_next(self, now: float) -> Optional[QueueEntry]:
        return self._pop(self._fsrr_heap, now)

    def fcfs_dequeue_next(self, now: float) -> Optional[QueueEntry]:
        return self._pop(self._fcfs_heap, now)

    def record_forward(self, source: NodeId, now: float) -> ForwardCacheEntry:
        entry = self.forward_cache.get(source)
        if entry is None:
            entry = self.forward_cache[source] = ForwardCacheEntry(source, 1, now)
        else:
            entry.rreq_count += 1
        return entry

    @property
    def residual(self) -> int:
        return len(self._live)
