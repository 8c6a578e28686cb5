#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
离散事件仿真引擎

维护全局周期计数器和事件队列。同一周期的事件按
（组件注册顺序, 插入序号）的全序投递，保证相同输入得到逐字节相同的事件轨迹。
"""

import heapq
import logging
from abc import ABC, abstractmethod
from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

from sim.errors import ContractViolation

logger = logging.getLogger(__name__)

# 仿真时间，单位为时钟周期
SimTime = int


class EventKind(str, Enum):
    """事件负载类型"""

    BUS_GRANT = "BusGrant"
    DMA_ELEMENT_DONE = "DmaElementDone"
    DMA_CHANNEL_DONE = "DmaChannelDone"
    IRQ_RAISE = "IrqRaise"
    POWER_TRANSITION_DONE = "PowerTransitionDone"
    ACCEL_DONE = "AccelDone"
    CPU_RESUME = "CpuResume"
    CUSTOM = "Custom"


@dataclass(frozen=True)
class Event:
    """
    仿真事件

    Args:
        time: 投递周期
        target: 目标组件名
        kind: 负载类型
        tag: Custom事件的标签，或其他事件的简短说明
        data: 附带对象（不参与比较，也不写入轨迹）
    """

    time: SimTime
    target: str
    kind: EventKind
    tag: str = ""
    data: Any = field(default=None, compare=False)

    def payload(self) -> str:
        """轨迹中使用的负载文本"""
        if self.kind is EventKind.CUSTOM:
            return f"Custom({self.tag})"
        describe = getattr(self.data, "describe", None)
        detail = describe() if callable(describe) else self.tag
        return f"{self.kind.value}({detail})" if detail else self.kind.value


class Component(ABC):
    """所有硬件模型遵守的组件约定：有唯一名字，并处理投递给它的事件"""

    name: str

    @abstractmethod
    def handle(self, event: Event) -> None:
        """处理一个事件"""


@dataclass
class RunSummary:
    """
    一次 run_until 的结果

    activity: 组件 -> 活动计数器 -> 数量（能量模块按事件类别计价）
    residency: 电源域 -> 状态名 -> 驻留周期数（由平台根据电源管理器时间线填写）
    """

    final_time: SimTime
    events_processed: int
    activity: Dict[str, Dict[str, float]] = field(default_factory=dict)
    residency: Dict[str, Dict[str, int]] = field(default_factory=dict)


class Engine:
    """确定性离散事件引擎"""

    def __init__(self, trace=None):
        """
        Args:
            trace: 可选的轨迹写入器（需要 write(cycle, component, payload) 方法）
        """
        self._queue: List[Tuple[SimTime, int, int, Event]] = []
        self._components: Dict[str, Component] = {}
        self._order: Dict[str, int] = {}
        self._seq = 0
        self._now: SimTime = 0
        self._processed = 0
        self._activity: Dict[str, Dict[str, float]] = defaultdict(lambda: defaultdict(float))
        self.trace = trace

    @property
    def now(self) -> SimTime:
        return self._now

    def register(self, component: Component) -> int:
        """注册组件，返回它在同周期排序中的序号"""
        if component.name in self._components:
            raise ContractViolation(f"component {component.name!r} registered twice")
        order = len(self._order)
        self._components[component.name] = component
        self._order[component.name] = order
        return order

    def component(self, name: str) -> Component:
        return self._components[name]

    def schedule(self, event: Event) -> None:
        """
        将事件加入队列

        Raises:
            ContractViolation: 事件时间早于当前时间，或目标组件未注册
        """
        if event.time < self._now:
            raise ContractViolation(
                f"event {event.payload()} for {event.target} scheduled at "
                f"{event.time}, before now={self._now}"
            )
        order = self._order.get(event.target)
        if order is None:
            raise ContractViolation(f"unknown event target {event.target!r}")
        heapq.heappush(self._queue, (event.time, order, self._seq, event))
        self._seq += 1

    def count(self, component: str, counter: str, amount: float = 1) -> None:
        """累加活动计数器"""
        self._activity[component][counter] += amount

    def pending(self) -> int:
        return len(self._queue)

    def run_until(self, limit: SimTime) -> RunSummary:
        """
        按序处理事件，直到队列为空或下一个事件超过 limit

        队列中仍有超过 limit 的事件时，当前时间推进到 limit；
        队列耗尽时，当前时间停在最后一个事件的周期。
        """
        processed = 0
        while self._queue and self._queue[0][0] <= limit:
            time, _, _, event = heapq.heappop(self._queue)
            self._now = time
            if self.trace is not None:
                self.trace.write(time, event.target, event.payload())
            self._components[event.target].handle(event)
            processed += 1
        if self._queue and limit > self._now:
            self._now = limit
        self._processed += processed
        logger.debug("[OK] 仿真推进到周期 %d，处理事件 %d 个", self._now, processed)
        return RunSummary(
            final_time=self._now,
            events_processed=processed,
            activity=self.activity_snapshot(),
        )

    def activity_snapshot(self) -> Dict[str, Dict[str, float]]:
        """按名字排序的活动计数器副本"""
        return {
            name: dict(sorted(counters.items()))
            for name, counters in sorted(self._activity.items())
        }

    @property
    def events_processed(self) -> int:
        return self._processed
