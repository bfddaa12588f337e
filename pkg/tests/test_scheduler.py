import random

import pytest
from hypothesis import given, strategies as st

from fsrr.fuzzy import Grade
from fsrr.geometry import Position
from fsrr.params import DestinationRecord, NeighborInfo, RouterView
from fsrr.scheduler import QueueEntry, RouteRequest, RreqQueue, grade_on_arrival


def req(req_id, origin=0.0, tau=1e9, source=0, dest=1):
    return RouteRequest(req_id, source, dest, origin, tau, (source,))


def entry(req_id, arrival, grade=None, **kw):
    return QueueEntry(req(req_id, **kw), arrival, None if grade is None else Grade.parse(grade))


def drain(queue, fcfs=False, now=0.0):
    out = []
    pop = queue.fcfs_dequeue_next if fcfs else queue.dequeue_next
    while (e := pop(now)) is not None:
        out.append(e)
    return out


def oracle_key(e):
    known = e.grade is not None
    return (0 if known else 1, -(int(e.grade) if known else 0), e.arrival_time, e.request.req_id)


def test_enqueue_and_duplicates():
    q = RreqQueue()
    assert q.enqueue(entry(1, 0.0))
    assert len(q) == 1
    assert not q.enqueue(entry(1, 0.5))
    assert len(q) == 1 and q.stats.dropped_duplicate == 1


def test_expired_entry_rejected():
    q = RreqQueue()
    assert not q.enqueue(entry(1, 5.0, origin=0.0, tau=2.0))
    assert len(q) == 0 and q.stats.dropped_expired == 1


def test_dequeue_example_order():
    q = RreqQueue()
    for i, (g, t) in enumerate([("b", 1), ("d", 2), ("d", 3), (None, 0)]):
        q.enqueue(entry(i, float(t), g))
    got = [(e.grade and str(e.grade), e.arrival_time) for e in drain(q, now=10)]
    assert got == [("d", 2), ("d", 3), ("b", 1), (None, 0)]


def test_unknown_only_is_fcfs():
    q = RreqQueue()
    for i, t in enumerate((5.0, 1.0, 3.0)):
        q.enqueue(entry(i, t))
    assert [e.arrival_time for e in drain(q, now=10)] == [1.0, 3.0, 5.0]


def test_single_and_empty():
    q = RreqQueue()
    assert q.dequeue_next(0.0) is None
    q.enqueue(entry(7, 0.0, "a"))
    assert drain(q)[0].request.req_id == 7


def test_fcfs_order_and_tiebreak():
    q = RreqQueue()
    for i, t in ((5, 2.0), (3, 0.0), (4, 1.0), (1, 1.0)):
        q.enqueue(entry(i, t, "d" if i % 2 else None))
    assert [e.request.req_id for e in drain(q, fcfs=True, now=3)] == [3, 1, 4, 5]
    assert q.fcfs_dequeue_next(3) is None


def test_waiting_time_recorded():
    q = RreqQueue()
    q.enqueue(entry(1, 1.0, "c"))
    q.enqueue(entry(2, 2.0, "a"))
    q.dequeue_next(4.0)
    q.dequeue_next(5.0)
    assert q.stats.total_wait == pytest.approx(3.0 + 3.0)
    assert q.stats.max_wait == pytest.approx(3.0)


def test_expired_at_dequeue_is_dropped_not_served():
    q = RreqQueue()
    q.enqueue(entry(1, 0.0, "d", tau=1.0))
    q.enqueue(entry(2, 0.5, "a", tau=10.0))
    served = drain(q, now=2.0)
    assert [e.request.req_id for e in served] == [2]
    assert q.stats.dropped_expired == 1
    s = q.stats
    assert s.received == s.dequeued + s.dropped_duplicate + s.dropped_expired + q.residual


grades = st.sampled_from([None, "a", "b", "c", "d"])


@given(st.lists(st.tuples(grades, st.integers(0, 20)), max_size=60))
def test_dequeue_matches_sort_oracle(items):
    q = RreqQueue()
    entries = [entry(i, float(t), g) for i, (g, t) in enumerate(items)]
    for e in entries:
        q.enqueue(e)
    assert drain(q, now=100) == sorted(entries, key=oracle_key)


@given(st.lists(st.tuples(grades, st.integers(0, 20)), max_size=40), st.randoms(use_true_random=False))
def test_fcfs_ignores_grades(items, rnd):
    def order(grade_list):
        q = RreqQueue()
        for i, ((_, t), g) in enumerate(zip(items, grade_list)):
            q.enqueue(entry(i, float(t), g))
        return [e.request.req_id for e in drain(q, fcfs=True, now=100)]

    original = [g for g, _ in items]
    shuffled = original[:]
    rnd.shuffle(shuffled)
    assert order(original) == order(shuffled)


def test_fifo_within_grade():
    rnd = random.Random(5)
    q = RreqQueue()
    for i in range(300):
        q.enqueue(entry(i, rnd.uniform(0, 50), rnd.choice([None, "b", "d"])))
    out = drain(q, now=100)
    for g in (None, Grade.B, Grade.D):
        times = [e.arrival_time for e in out if e.grade == g]
        assert times == sorted(times)


def test_record_forward():
    q = RreqQueue()
    q.record_forward(3, 5.0)
    e = q.record_forward(3, 9.0)
    assert (e.source, e.rreq_count, e.first_forward_time) == (3, 2, 5.0)
    q.record_forward(4, 6.0)
    assert q.forward_cache[4].rreq_count == 1
    assert q.forward_cache[3].rreq_count == 2


def _view(record, neighbors=(), now=100.0, self_pos=(0.0, 0.0)):
    return RouterView(0, Position(*self_pos), now, tuple(neighbors), None, record, 50.0, 30.0, 700.0)


def test_grade_on_arrival_unknown():
    e = grade_on_arrival(req(1), _view(None))
    assert e.grade is None and e.trace is None and e.arrival_time == 100.0


def test_grade_on_arrival_favourable():
    # fresh fix, slow destination right here, and neighbours with much newer contacts
    rec = DestinationRecord(1, Position(0, 0), 100.0, 0.0)
    nbs = [NeighborInfo(2, Position(1, 1), 100.0), NeighborInfo(3, Position(2, 2), 50.0)]
    view = RouterView(0, Position(0, 0), 100.0, tuple(nbs), 1.0, rec, 50.0, 30.0, 700.0)
    e = grade_on_arrival(req(1), view)
    assert e.grade == Grade.D
    assert e.trace.delay == Grade.D


def test_grade_on_arrival_unfavourable():
    rec = DestinationRecord(1, Position(500, 500), 0.0, 50.0)
    view = RouterView(0, Position(0, 0), 100.0, (), None, rec, 50.0, 30.0, 500 * 2 ** 0.5)
    e = grade_on_arrival(req(1), view)
    assert e.grade == Grade.A
