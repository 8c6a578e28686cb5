"""离散事件引擎"""

import io

import pytest

from sim.engine import Component, Engine, Event, EventKind
from sim.errors import ContractViolation
from utils.trace import TraceWriter


class Recorder(Component):
    def __init__(self, name, engine, log, follow_up=None):
        self.name = name
        self.engine = engine
        self.log = log
        self.follow_up = follow_up

    def handle(self, event):
        self.log.append((self.engine.now, self.name, event.tag))
        if self.follow_up and event.tag == self.follow_up[0]:
            delay, tag = self.follow_up[1:]
            self.engine.schedule(Event(self.engine.now + delay, self.name, EventKind.CUSTOM, tag=tag))


def make_engine(*names, trace=None):
    engine = Engine(trace)
    log = []
    for name in names:
        engine.register(Recorder(name, engine, log))
    return engine, log


def test_events_run_in_time_then_registration_order():
    engine, log = make_engine("a", "b")
    engine.schedule(Event(5, "b", EventKind.CUSTOM, tag="b5"))
    engine.schedule(Event(5, "a", EventKind.CUSTOM, tag="a5-first"))
    engine.schedule(Event(3, "b", EventKind.CUSTOM, tag="b3"))
    engine.schedule(Event(5, "a", EventKind.CUSTOM, tag="a5-second"))
    summary = engine.run_until(100)
    assert [tag for _, _, tag in log] == ["b3", "a5-first", "a5-second", "b5"]
    assert summary.final_time == 5
    assert summary.events_processed == 4


def test_scheduling_in_the_past_is_a_contract_violation():
    engine, _ = make_engine("a")
    engine.schedule(Event(10, "a", EventKind.CUSTOM))
    engine.run_until(100)
    with pytest.raises(ContractViolation):
        engine.schedule(Event(5, "a", EventKind.CUSTOM))


def test_unknown_target_is_rejected():
    engine, _ = make_engine("a")
    with pytest.raises(ContractViolation):
        engine.schedule(Event(0, "nobody", EventKind.CUSTOM))


def test_duplicate_registration_is_rejected():
    engine, log = make_engine("a")
    with pytest.raises(ContractViolation):
        engine.register(Recorder("a", engine, log))


def test_run_until_stops_at_limit():
    engine, log = make_engine("a")
    engine.schedule(Event(5, "a", EventKind.CUSTOM, tag="early"))
    engine.schedule(Event(20, "a", EventKind.CUSTOM, tag="late"))
    summary = engine.run_until(10)
    assert summary.final_time == 10
    assert engine.pending() == 1
    engine.run_until(30)
    assert [tag for _, _, tag in log] == ["early", "late"]
    assert engine.now == 20
    assert engine.events_processed == 2


def test_handlers_may_schedule_at_the_current_cycle():
    engine = Engine()
    log = []
    engine.register(Recorder("a", engine, log, follow_up=("start", 0, "same-cycle")))
    engine.schedule(Event(4, "a", EventKind.CUSTOM, tag="start"))
    engine.run_until(100)
    assert log == [(4, "a", "start"), (4, "a", "same-cycle")]


def test_activity_counters_accumulate():
    engine, _ = make_engine("a")
    engine.count("cpu", "cpu_active_cycle", 10)
    engine.count("cpu", "cpu_active_cycle", 2.5)
    engine.count("bank0", "mem_access")
    assert engine.activity_snapshot() == {"bank0": {"mem_access": 1}, "cpu": {"cpu_active_cycle": 12.5}}


def test_trace_records_every_delivered_event():
    stream = io.StringIO()
    trace = TraceWriter(stream)
    engine, _ = make_engine("a", trace=trace)
    engine.schedule(Event(1, "a", EventKind.CUSTOM, tag="tick"))
    engine.schedule(Event(2, "a", EventKind.IRQ_RAISE, tag="line=0"))
    engine.run_until(10)
    assert trace.rows == 2
    assert stream.getvalue().splitlines() == [
        "cycle,component,payload",
        "1,a,Custom(tick)",
        "2,a,IrqRaise(line=0)",
    ]
