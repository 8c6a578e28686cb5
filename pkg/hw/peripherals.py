#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
外设占位模型

外设只建模寄存器读写、电源可用性和中断源，不建模具体功能。
定时器是唯一有行为的外设：一次性倒计时，到期触发 Timer 中断线。
"""

import logging
from typing import Callable, Dict, Optional

from hw.memory import AccessKind
from hw.power import InterruptController, InterruptLine
from sim.engine import Component, Engine, Event, EventKind
from sim.errors import ConfigError, ContractViolation, SlaveError

logger = logging.getLogger(__name__)


def _always() -> bool:
    return True


class RegisterFile:
    """
    32位寄存器组，按字对齐存储，支持1/2/4字节访问

    Args:
        name: 区域名
        size_bytes: 窗口大小
        powered: 返回当前是否可访问
    """

    def __init__(self, name: str, size_bytes: int, powered: Callable[[], bool] = _always):
        self.name = name
        self.size_bytes = size_bytes
        self.registers: Dict[int, int] = {}
        self._powered = powered

    @property
    def powered(self) -> bool:
        return self._powered()

    def access(self, offset: int, kind: AccessKind, width: int, data: Optional[int] = None) -> Optional[int]:
        if offset < 0 or offset + width > self.size_bytes:
            raise ContractViolation(f"{self.name}: offset {offset:#x} outside window")
        if not self.powered:
            raise SlaveError(f"{self.name} is powered down")
        word = offset & ~3
        shift = (offset & 3) * 8
        mask = ((1 << (8 * width)) - 1) << shift
        current = self.registers.get(word, 0)
        if kind is AccessKind.READ:
            return (current & mask) >> shift
        self.registers[word] = (current & ~mask) | (((data or 0) << shift) & mask)
        self.on_write(word)
        return None

    def on_write(self, word: int) -> None:
        """寄存器写入后的钩子"""


# 定时器寄存器
TIMER_LOAD = 0x00
TIMER_CTRL = 0x04


class TimerPeripheral(RegisterFile, Component):
    """一次性定时器；外设子系统不在 On 时到期的中断被丢弃"""

    name = "timer"

    def __init__(
        self,
        engine: Engine,
        irq: InterruptController,
        line: InterruptLine,
        size_bytes: int,
        powered: Callable[[], bool] = _always,
    ):
        super().__init__("timer", size_bytes, powered)
        self.engine = engine
        self.irq = irq
        self.line = line
        self.fired = 0
        self.suppressed = 0
        self._generation = 0

    def on_write(self, word: int) -> None:
        if word == TIMER_CTRL and self.registers[TIMER_CTRL] & 1:
            self.registers[TIMER_CTRL] = 0
            load = self.registers.get(TIMER_LOAD, 0)
            # 总线写入的非法周期是从设备错误，不中止仿真
            if load < 1:
                raise SlaveError(f"timer LOAD={load} cannot be armed")
            self.arm(load)

    def arm(self, cycles: int) -> int:
        """
        N 个周期后到期，重新装载会取消上一次

        Returns:
            int: 到期周期
        """
        if cycles < 1:
            raise ConfigError("timer period must be >= 1 cycle")
        self._generation += 1
        expire = self.engine.now + cycles
        self.engine.schedule(Event(expire, self.name, EventKind.CUSTOM, tag="timer-expire", data=self._generation))
        return expire

    def handle(self, event: Event) -> None:
        if event.data != self._generation:
            return
        if not self.powered:
            self.suppressed += 1
            logger.debug("[WARN] 外设子系统未上电，定时器中断被丢弃 @%d", self.engine.now)
            return
        self.fired += 1
        self.irq.raise_line(self.line)
