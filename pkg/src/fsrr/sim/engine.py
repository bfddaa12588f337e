"""Discrete-event MANET route-discovery simulator.

One generic on-demand protocol: a CBR session that finds no usable route
starts a discovery, the route request is queued and served at every router
it reaches, and the destination answers with a route reply that retraces
the request's path. Schedulers (FCFS or FSRR) and forwarding rules (flood or
DEC-directional) are switched by the scenario config.

Mobility advances on a fixed clock; packet events happen in continuous time
between ticks. All randomness comes from generators spawned off the scenario
seed, and mobility draws never interleave with packet handling, so every
variant of a scenario sees the same node trajectories.
"""

from __future__ import annotations

import dataclasses
import hashlib
import heapq
import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .. import geometry
from ..geometry import Position
from ..params import DestinationRecord, NeighborInfo, RouterView
from ..scheduler import QueueEntry, QueueStats, RouteRequest, RreqQueue, grade_on_arrival
from .config import CbrSession, ScenarioConfig
from .mobility import MobilityState, init_mobility, neighbor_table, step_mobility

log = logging.getLogger(__name__)

# event kinds; the number doubles as the tie-break priority at equal times
TICK, CBR, REPLY, ARRIVE, SERVE = range(5)
_KIND_NAMES = {TICK: "tick", CBR: "cbr", REPLY: "reply", ARRIVE: "arrive", SERVE: "serve"}


@dataclass
class NodeState:
    id: int
    v_max: float
    rreq_queue: RreqQueue = field(default_factory=RreqQueue)
    # peer -> largest timestamp of communication with that peer
    comm_cache: dict[int, float] = field(default_factory=dict)
    dest_records: dict[int, DestinationRecord] = field(default_factory=dict)
    busy: bool = False

    @property
    def forward_cache(self):
        return self.rreq_queue.forward_cache


@dataclass(frozen=True)
class Metrics:
    total_wait: float
    routers_used: int
    node_count: int
    per_node_wait_per_router: float
    rreq_forwarded: int
    rreq_dropped_expired: int
    rreq_dropped_duplicate: int
    discoveries_started: int
    discoveries_completed: int
    mean_discovery_latency: float


METRIC_FIELDS = tuple(f.name for f in dataclasses.fields(Metrics))


def per_node_wait_per_router(total_wait: float, node_count: int, routers_used: int) -> float:
    if routers_used == 0:
        return 0.0
    return total_wait / (node_count * routers_used)


@dataclass(frozen=True)
class WaitRecord:
    run_id: str
    router_id: int
    req_id: int
    grade: str  # "a".."d" or "unknown"
    arrival: float
    service_start: float

    @property
    def wait(self) -> float:
        return self.service_start - self.arrival


WAIT_LOG_FIELDS = tuple(f.name for f in dataclasses.fields(WaitRecord))


@dataclass(frozen=True)
class Transmit:
    """A packet leaving a router: a forwarded request or the first reply hop."""

    kind: str  # "rreq" or "reply"
    time: float
    target: int
    request: RouteRequest


@dataclass
class RunResult:
    config: ScenarioConfig
    metrics: Metrics
    digest: str
    wait_log: list[WaitRecord]
    queue_stats: dict[int, QueueStats]
    residual: dict[int, int]
    clamp_counts: Counter
    events_processed: int


@dataclass
class _Session:
    spec: CbrSession
    route: Optional[tuple[int, ...]] = None
    pending_req: Optional[int] = None
    pending_since: float = 0.0


@dataclass
class _Discovery:
    session: Optional[int]
    origin_time: float
    completed: bool = False


def _spawn_rngs(seed: int) -> dict[str, np.random.Generator]:
    children = np.random.SeedSequence(seed).spawn(3)
    return {
        name: np.random.Generator(np.random.PCG64(ss))
        for name, ss in zip(("speeds", "mobility", "traffic"), children)
    }


def generate_sessions(config: ScenarioConfig, rng: np.random.Generator) -> list[CbrSession]:
    sessions = list(config.traffic)
    if config.session_fraction > 0:
        n = config.node_count
        count = max(1, round(config.session_fraction * n))
        for _ in range(count):
            src = int(rng.integers(n))
            dst = int(rng.integers(n - 1))
            if dst >= src:
                dst += 1
            start = float(rng.uniform(0, 1.0 / config.cbr_rate))
            sessions.append(CbrSession(src, dst, start, config.cbr_rate))
    return sessions


class Simulation:
    def __init__(self, config: ScenarioConfig):
        self.config = config.validate()
        cfg = self.config
        rngs = _spawn_rngs(cfg.rng_seed)
        self.mobility_rng = rngs["mobility"]
        n = cfg.node_count
        caps = np.array([cfg.v_max_per_node * (1.0 - rngs["speeds"].random()) for _ in range(n)])
        self.v_net_max = float(caps.max()) if n else 0.0
        positions = np.array(cfg.initial_positions, dtype=float) if cfg.initial_positions else None
        self.mob: MobilityState = init_mobility(
            n, cfg.area_w, cfg.area_h, caps, cfg.mobility, self.mobility_rng,
            walk_epoch=cfg.walk_epoch, positions=positions,
        )
        self.nodes = [NodeState(i, float(caps[i])) for i in range(n)]
        self.sessions = [_Session(s) for s in generate_sessions(cfg, rngs["traffic"])]
        self.now = 0.0
        self._positions: list[Optional[Position]] = [None] * n
        self.refresh_neighbors()

        self._heap: list[tuple] = []
        self._seq = 0
        self._next_req = 0
        self._hash = hashlib.sha256()
        self._hello_every = max(1, round(cfg.hello_interval / cfg.timestep))
        self._dequeue = "dequeue_next" if cfg.scheduler == "fsrr" else "fcfs_dequeue_next"
        self.discoveries: dict[int, _Discovery] = {}
        self.latencies: list[float] = []
        self.wait_log: list[WaitRecord] = []
        self.clamps: Counter = Counter()
        self.rreq_forwarded = 0
        self.expired_in_service = 0
        # services where a record steered the choice among two or more candidates
        self.directed_branchings = 0
        self.events_processed = 0

    # ------------------------------------------------------------------
    # topology

    def position(self, node: int) -> Position:
        cached = self._positions[node]
        if cached is None:
            x, y = self.mob.pos[node]
            cached = self._positions[node] = Position(float(x), float(y))
        return cached

    def refresh_neighbors(self) -> None:
        self.neighbors = neighbor_table(self.mob.pos, self.config.tx_range)
        self._neighbor_sets = [frozenset(nb) for nb in self.neighbors]

    def _route_valid(self, path: tuple[int, ...]) -> bool:
        return all(b in self._neighbor_sets[a] for a, b in zip(path, path[1:]))

    # ------------------------------------------------------------------
    # event calendar

    def _push(self, time: float, kind: int, *payload) -> None:
        if time < self.now:
            raise RuntimeError("event scheduled in the past")
        self._seq += 1
        heapq.heappush(self._heap, (time, kind, self._seq, payload))

    def _log(self, kind: int, *fields) -> None:
        self._hash.update(f"{_KIND_NAMES[kind]}|{self.now!r}|{'|'.join(map(str, fields))}\n".encode())

    def run(self) -> RunResult:
        cfg = self.config
        self._push(cfg.timestep, TICK, 1)
        for idx, s in enumerate(self.sessions):
            if s.spec.start <= cfg.sim_time:
                self._push(s.spec.start, CBR, idx, 0)
        while self._heap and self._heap[0][0] <= cfg.sim_time:
            time, kind, _, payload = heapq.heappop(self._heap)
            self.now = time
            self.events_processed += 1
            if kind == TICK:
                self._on_tick(*payload)
            elif kind == CBR:
                self._on_cbr(*payload)
            elif kind == ARRIVE:
                self._on_arrive(*payload)
            elif kind == SERVE:
                self._on_serve(*payload)
            else:
                self._on_reply(*payload)
        return self._result()

    def _on_tick(self, k: int) -> None:
        cfg = self.config
        step_mobility(self.mob, cfg.timestep, cfg.mobility, self.mobility_rng)
        self._positions = [None] * cfg.node_count
        if k % self._hello_every == 0:
            self.refresh_neighbors()
        nxt = (k + 1) * cfg.timestep
        if nxt <= cfg.sim_time:
            self._push(nxt, TICK, k + 1)

    def _on_cbr(self, idx: int, k: int) -> None:
        session = self.sessions[idx]
        spec = session.spec
        self._log(CBR, idx, k)
        if self.config.discovery == "per_packet":
            self.start_discovery(spec.source, spec.dest, self.now, session=idx)
        else:
            if session.route is not None and not self._route_valid(session.route):
                session.route = None
            stale = self.now - session.pending_since > self.config.tau
            if session.route is None and (session.pending_req is None or stale):
                req = self.start_discovery(spec.source, spec.dest, self.now, session=idx)
                session.pending_req = req.req_id
                session.pending_since = self.now
        nxt = spec.start + (k + 1) / spec.rate
        if nxt <= self.config.sim_time and (spec.stop is None or nxt <= spec.stop):
            self._push(nxt, CBR, idx, k + 1)

    # ------------------------------------------------------------------
    # route discovery

    def start_discovery(
        self, source: int, dest: int, now: float, session: Optional[int] = None
    ) -> RouteRequest:
        if source == dest:
            raise ValueError("source and destination must differ")
        req = RouteRequest(
            req_id=self._next_req,
            source=source,
            dest=dest,
            origin_time=now,
            tau=self.config.tau,
            path=(source,),
            carried_dest_record=self.nodes[source].dest_records.get(dest),
            source_loc=self.position(source),
        )
        self._next_req += 1
        self.discoveries[req.req_id] = _Discovery(session, now)
        self._on_arrive(source, req)
        return req

    def update_knowledge(self, node: int, origin: int, fix: Position, fix_time: float, now: float) -> None:
        """Record that ``node`` heard from ``origin`` at ``now`` with a position fix."""
        state = self.nodes[node]
        if now > state.comm_cache.get(origin, -math.inf):
            state.comm_cache[origin] = now
        rec = state.dest_records.get(origin)
        if rec is None or fix_time >= rec.tmr:
            state.dest_records[origin] = DestinationRecord(origin, fix, fix_time, self.nodes[origin].v_max)

    def effective_record(self, node: int, req: RouteRequest) -> Optional[DestinationRecord]:
        """The fresher of the router's own record and the one the request carries."""
        own = self.nodes[node].dest_records.get(req.dest)
        carried = req.carried_dest_record
        if carried is None or (own is not None and own.tmr >= carried.tmr):
            return own
        return carried

    def router_view(self, node: int, req: RouteRequest, now: float) -> RouterView:
        dest = req.dest
        neighbors = []
        for j in self.neighbors[node]:
            # a destination in range has, trivially, the freshest contact with itself
            c = now if j == dest else self.nodes[j].comm_cache.get(dest)
            neighbors.append(NeighborInfo(j, self.position(j), c))
        return RouterView(
            self_id=node,
            self_pos=self.position(node),
            now=now,
            neighbors=tuple(neighbors),
            own_c_id=self.nodes[node].comm_cache.get(dest),
            dest_record=self.effective_record(node, req),
            v_net_max=self.v_net_max,
            v_s=self.config.v_s,
            area_diagonal=self.config.area_diagonal,
        )

    def _on_arrive(self, node: int, req: RouteRequest) -> None:
        now = self.now
        self._log(ARRIVE, node, req.req_id)
        if node != req.source and req.source_loc is not None:
            self.update_knowledge(node, req.source, req.source_loc, req.origin_time, now)
        state = self.nodes[node]
        queue = state.rreq_queue
        if queue.seen(req.req_id):
            queue.enqueue(QueueEntry(req, now))  # counted as a duplicate
            return
        entry = grade_on_arrival(req, self.router_view(node, req, now), self.clamps)
        if queue.enqueue(entry) and not state.busy:
            state.busy = True
            self._push(now, SERVE, node)

    def _on_serve(self, node: int) -> None:
        now = self.now
        state = self.nodes[node]
        entry = getattr(state.rreq_queue, self._dequeue)(now)
        if entry is None:
            state.busy = False
            return
        self._log(SERVE, node, entry.request.req_id)
        self.wait_log.append(WaitRecord(
            self.config.run_id, node, entry.request.req_id,
            "unknown" if entry.grade is None else str(entry.grade),
            entry.arrival_time, now,
        ))
        transmits = self.service_rreq(node, entry, now)
        for tx in transmits:
            if tx.kind == "rreq":
                self._push(tx.time, ARRIVE, tx.target, tx.request)
            else:
                self._push(tx.time, REPLY, tx.target, tx.request, self.position(node), now, 1)
        busy_for = self.config.service_time + self.config.per_copy_time * len(transmits)
        self._push(now + busy_for, SERVE, node)

    def service_rreq(self, router: int, entry: QueueEntry, now: float) -> list[Transmit]:
        cfg = self.config
        req = entry.request
        if req.expired_at(now):
            self.expired_in_service += 1
            return []
        self.nodes[router].rreq_queue.record_forward(req.source, now)
        hop_time = now + cfg.hop_latency
        if router == req.dest:
            # reply retraces the request path; path[-1] is the destination itself
            return [Transmit("reply", hop_time, req.path[-2], req)]
        targets = [j for j in self.neighbors[router] if j not in req.path]
        record = self.effective_record(router, req)
        if cfg.forwarding == "dec_directional" and record is not None:
            dec = geometry.dec_build(record.last_loc, record.v_max_d, req.tau, record.tmr, req.origin_time)
            if dec.expired:
                self.expired_in_service += 1
                return []
            if len(targets) > 1:
                self.directed_branchings += 1
            targets = [
                j for j in targets
                if geometry.forward_eligible(self.position(j), dec, cfg.v_s, req.tau, record.tmr, req.origin_time)
            ]
        self.rreq_forwarded += len(targets)
        return [
            Transmit("rreq", hop_time, j, RouteRequest(
                req.req_id, req.source, req.dest, req.origin_time, req.tau,
                req.path + (j,), record, req.source_loc,
            ))
            for j in targets
        ]

    def _on_reply(self, node: int, req: RouteRequest, fix: Position, fix_time: float, hop: int) -> None:
        now = self.now
        self._log(REPLY, node, req.req_id)
        self.update_knowledge(node, req.dest, fix, fix_time, now)
        path = req.path
        if node != req.source:
            nxt = path[len(path) - 2 - hop]
            self._push(now + self.config.hop_latency, REPLY, nxt, req, fix, fix_time, hop + 1)
            return
        disc = self.discoveries[req.req_id]
        if disc.completed:
            return
        disc.completed = True
        self.latencies.append(now - disc.origin_time)
        if disc.session is not None:
            session = self.sessions[disc.session]
            session.route = path
            if session.pending_req == req.req_id:
                session.pending_req = None

    # ------------------------------------------------------------------

    def _result(self) -> RunResult:
        stats = {s.id: s.rreq_queue.stats for s in self.nodes}
        total_wait = math.fsum(r.wait for r in self.wait_log)
        routers_used = sum(1 for st in stats.values() if st.dequeued > 0)
        n = self.config.node_count
        completed = sum(1 for d in self.discoveries.values() if d.completed)
        metrics = Metrics(
            total_wait=total_wait,
            routers_used=routers_used,
            node_count=n,
            per_node_wait_per_router=per_node_wait_per_router(total_wait, n, routers_used),
            rreq_forwarded=self.rreq_forwarded,
            rreq_dropped_expired=sum(st.dropped_expired for st in stats.values()) + self.expired_in_service,
            rreq_dropped_duplicate=sum(st.dropped_duplicate for st in stats.values()),
            discoveries_started=len(self.discoveries),
            discoveries_completed=completed,
            mean_discovery_latency=math.fsum(self.latencies) / len(self.latencies) if self.latencies else 0.0,
        )
        self._hash.update(repr(dataclasses.astuple(metrics)).encode())
        log.info("run %s done: %d events, metric %.6f", self.config.run_id or "-", self.events_processed,
                 metrics.per_node_wait_per_router)
        return RunResult(
            config=self.config,
            metrics=metrics,
            digest=self._hash.hexdigest(),
            wait_log=self.wait_log,
            queue_stats=stats,
            residual={s.id: s.rreq_queue.residual for s in self.nodes},
            clamp_counts=self.clamps,
            events_processed=self.events_processed,
        )


def run(config: ScenarioConfig) -> Metrics:
    return Simulation(config).run().metrics


def run_full(config: ScenarioConfig) -> RunResult:
    return Simulation(config).run()
