#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
电源管理器与快速中断控制器

电源域：cpu、bank{i}、peripheral、ao、bus、debug、accel{slot}。
ao/bus/debug 属于常开部分，永远处于 On。
每个域记录状态时间线，运行结束后换算成各状态的驻留周期数，供能量模块计算漏电。
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING, Callable, Dict, List, Optional, Sequence, Tuple

from config.platform_config import PlatformConfig
from hw.memory import MemoryBank, PendingTransition, PowerState, transition_latency
from sim.engine import Component, Engine, Event, EventKind
from sim.errors import ConfigError, ContractViolation, IllegalTransition

if TYPE_CHECKING:
    from energy.models import LeakageModel

logger = logging.getLogger(__name__)


class DomainKind(str, Enum):
    CPU = "Cpu"
    BANK = "Bank"
    PERIPHERAL = "PeripheralSubsystem"
    AO = "AoSubsystem"
    BUS = "Bus"
    DEBUG = "Debug"
    ACCELERATOR = "Accelerator"


ALWAYS_ON_KINDS = (DomainKind.AO, DomainKind.BUS, DomainKind.DEBUG)

# 状态变化监听器：(旧状态, 新状态)
StateListener = Callable[[PowerState, PowerState], None]


@dataclass
class PowerDomain:
    """一个电源域及其状态时间线"""

    name: str
    kind: DomainKind
    gateable: bool = True
    index: int = 0
    state: PowerState = PowerState.ON
    pending: Optional[PendingTransition] = None
    timeline: List[Tuple[int, PowerState]] = field(default_factory=lambda: [(0, PowerState.ON)])
    generation: int = 0

    def record(self, cycle: int, state: PowerState) -> None:
        if self.timeline[-1][0] == cycle:
            self.timeline[-1] = (cycle, state)
        else:
            self.timeline.append((cycle, state))

    def residency(self, until: int) -> Dict[str, int]:
        """[0, until) 内各状态的驻留周期数"""
        cycles = {s.value: 0 for s in PowerState}
        for i, (start, state) in enumerate(self.timeline):
            end = self.timeline[i + 1][0] if i + 1 < len(self.timeline) else until
            end = min(end, until)
            if end > start:
                cycles[state.value] += end - start
        return cycles


class PowerManager(Component):
    """执行电源域状态转换，转换在完成周期生效"""

    name = "power"

    def __init__(self, engine: Engine, config: PlatformConfig, banks: Sequence[MemoryBank]):
        self.engine = engine
        self.config = config
        self.timing = config.timing
        self._banks = list(banks)
        self._listeners: Dict[str, List[StateListener]] = {}
        self.domains: Dict[str, PowerDomain] = {}

        self._add(PowerDomain("cpu", DomainKind.CPU))
        for bank in self._banks:
            self._add(PowerDomain(bank.name, DomainKind.BANK, gateable=bank.gateable, index=bank.index))
        self._add(PowerDomain("peripheral", DomainKind.PERIPHERAL))
        self._add(PowerDomain("ao", DomainKind.AO, gateable=False))
        self._add(PowerDomain("bus", DomainKind.BUS, gateable=False))
        self._add(PowerDomain("debug", DomainKind.DEBUG, gateable=False))
        for slot in range(config.accelerator_slots):
            self._add(PowerDomain(f"accel{slot}", DomainKind.ACCELERATOR, index=slot))

    def _add(self, domain: PowerDomain) -> None:
        self.domains[domain.name] = domain

    def domain(self, name: str) -> PowerDomain:
        try:
            return self.domains[name]
        except KeyError:
            raise ConfigError(f"unknown power domain {name!r}") from None

    def state(self, name: str) -> PowerState:
        return self.domain(name).state

    def states(self) -> Dict[str, PowerState]:
        return {name: d.state for name, d in self.domains.items()}

    def subscribe(self, name: str, listener: StateListener) -> None:
        self.domain(name)
        self._listeners.setdefault(name, []).append(listener)

    def request_transition(self, name: str, target: PowerState) -> PendingTransition:
        """
        发起电源域状态转换

        存储体委托给 MemoryBank 的转换规则；其他域门控1周期、解除门控1周期、上电10周期（可配置）。
        新请求取代尚未完成的旧请求。

        Returns:
            PendingTransition: 完成周期与代号

        Raises:
            IllegalTransition: 不可门控的域被要求离开 On，或对逻辑域请求 Retentive
        """
        domain = self.domain(name)
        if not domain.gateable and target is not PowerState.ON:
            raise IllegalTransition(f"{name} is not gateable")
        if target is PowerState.RETENTIVE and domain.kind is not DomainKind.BANK:
            raise IllegalTransition(f"Retentive is a memory-only state, {name} is {domain.kind.value}")

        now = self.engine.now
        if domain.kind is DomainKind.BANK:
            pending = self._banks[domain.index].set_power_state(target, now)
            domain.pending = pending
        else:
            domain.generation += 1
            latency = transition_latency(domain.state, target, self.timing)
            pending = PendingTransition(target, now + latency, domain.generation)
            domain.pending = pending

        if pending.complete_at == now:
            # 相同状态：存储体已自行完成
            if domain.kind is DomainKind.BANK:
                self._apply(domain, self._banks[domain.index].power_state)
            else:
                self._finish(domain, pending)
            return pending

        logger.debug("[SEND] %s -> %s，预计周期 %d 完成", name, target.value, pending.complete_at)
        self.engine.schedule(
            Event(
                pending.complete_at,
                self.name,
                EventKind.POWER_TRANSITION_DONE,
                tag=f"{name}->{target.value}",
                data=(name, pending),
            )
        )
        return pending

    def _finish(self, domain: PowerDomain, pending: PendingTransition) -> bool:
        if domain.kind is DomainKind.BANK:
            if not self._banks[domain.index].finish_transition(pending):
                return False
        elif domain.pending is None or domain.pending.generation != pending.generation:
            return False
        self._apply(domain, pending.target)
        return True

    def _apply(self, domain: PowerDomain, target: PowerState) -> None:
        previous = domain.state
        domain.state = target
        domain.pending = None
        domain.record(self.engine.now, target)
        if previous is not target:
            logger.debug("[OK] %s: %s -> %s @%d", domain.name, previous.value, target.value, self.engine.now)
            for listener in self._listeners.get(domain.name, []):
                listener(previous, target)

    def wake_cpu(self) -> None:
        """中断唤醒：CPU 立即回到 On，作废尚未完成的门控请求"""
        cpu = self.domains["cpu"]
        cpu.generation += 1
        cpu.pending = None
        if cpu.state is not PowerState.ON:
            self._apply(cpu, PowerState.ON)

    def handle(self, event: Event) -> None:
        if event.kind is not EventKind.POWER_TRANSITION_DONE:
            raise ContractViolation(f"power manager cannot handle {event.payload()}")
        name, pending = event.data
        if not self._finish(self.domain(name), pending):
            logger.debug("[WARN] %s 的过期转换被忽略", name)

    def always_on_holds(self) -> bool:
        return all(d.state is PowerState.ON for d in self.domains.values() if d.kind in ALWAYS_ON_KINDS)

    def residency(self, until: int) -> Dict[str, Dict[str, int]]:
        return {name: d.residency(until) for name, d in sorted(self.domains.items())}

    def leakage_uw(self, model: "LeakageModel") -> float:
        """当前状态下的瞬时漏电功率"""
        return model.power_uw(self.states())


def deep_sleep_leakage(config: PlatformConfig) -> float:
    """
    所有可门控域关断后的漏电功率（µW）

    结果是常开域（ao/bus/debug）与不可门控存储体的漏电之和。
    """
    # 延迟导入：energy.models 依赖 hw.memory
    from energy.models import LeakageModel

    model = LeakageModel.from_config(config)
    domains = ["ao", "bus", "debug"]
    domains += [f"bank{i}" for i in range(config.bank_count) if not config.is_bank_gateable(i)]
    return model.floor_uw(domains)


class InterruptSource(str, Enum):
    DMA_CHANNEL = "DmaChannel"
    DMA_ERROR = "DmaError"
    ACCELERATOR = "Accelerator"
    TIMER = "Timer"
    EXTERNAL = "External"


@dataclass(frozen=True)
class InterruptLine:
    id: int
    source: InterruptSource
    index: int = 0

    @property
    def name(self) -> str:
        if self.source is InterruptSource.DMA_CHANNEL:
            return f"dma{self.index}"
        if self.source is InterruptSource.DMA_ERROR:
            return f"dma{self.index}-error"
        if self.source is InterruptSource.ACCELERATOR:
            return f"accel{self.index}"
        return self.source.value.lower()

    def describe(self) -> str:
        return f"line={self.id} source={self.name}"


class WakeAction(str, Enum):
    PENDING = "pending"
    RESUME = "resume"


class InterruptController(Component):
    """
    快速中断控制器

    每次路由都会置位对应线的待处理标志，由场景程序消费；
    CPU 处于睡眠且尚未安排唤醒时，在 interrupt_latency 周期后投递 CpuResume。
    """

    name = "irq"

    def __init__(self, engine: Engine, interrupt_latency: int = 1):
        self.engine = engine
        self.interrupt_latency = interrupt_latency
        self._lines: Dict[Tuple[InterruptSource, int], InterruptLine] = {}
        self._flags: Dict[int, bool] = {}
        self._cpu = None
        self._resume_scheduled = False
        self.routed = 0

    def allocate(self, source: InterruptSource, index: int = 0) -> InterruptLine:
        key = (source, index)
        if key in self._lines:
            raise ContractViolation(f"interrupt source {source.value}({index}) already has a line")
        line = InterruptLine(len(self._lines), source, index)
        self._lines[key] = line
        self._flags[line.id] = False
        return line

    def line(self, source: InterruptSource, index: int = 0) -> InterruptLine:
        try:
            return self._lines[(source, index)]
        except KeyError:
            raise ConfigError(f"no interrupt line for {source.value}({index})") from None

    @property
    def lines(self) -> List[InterruptLine]:
        return list(self._lines.values())

    def attach_cpu(self, cpu) -> None:
        """cpu 需要提供 sleeping 属性"""
        self._cpu = cpu

    def raise_line(self, line: InterruptLine) -> None:
        """中断源调用：本周期投递 IrqRaise"""
        self.engine.schedule(Event(self.engine.now, self.name, EventKind.IRQ_RAISE, data=line))

    def route_interrupt(self, line: InterruptLine) -> List[WakeAction]:
        """
        路由一个中断

        Returns:
            List[WakeAction]: 总是包含 PENDING；安排了唤醒时再包含 RESUME
        """
        self.routed += 1
        self._flags[line.id] = True
        actions = [WakeAction.PENDING]
        if self._cpu is not None and self._cpu.sleeping and not self._resume_scheduled:
            self._resume_scheduled = True
            self.engine.schedule(
                Event(self.engine.now + self.interrupt_latency, "cpu", EventKind.CPU_RESUME, tag=line.name)
            )
            actions.append(WakeAction.RESUME)
        logger.debug("[RECV] 中断 %s @%d", line.name, self.engine.now)
        return actions

    def resume_delivered(self) -> None:
        self._resume_scheduled = False

    def pending_lines(self) -> List[InterruptLine]:
        return [line for line in self._lines.values() if self._flags[line.id]]

    def consume(self) -> List[InterruptLine]:
        """取走并清除全部待处理标志"""
        lines = self.pending_lines()
        for line in lines:
            self._flags[line.id] = False
        return lines

    def handle(self, event: Event) -> None:
        if event.kind is not EventKind.IRQ_RAISE:
            raise ContractViolation(f"interrupt controller cannot handle {event.payload()}")
        self.route_interrupt(event.data)
