#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
分体片上存储

每个存储体有独立的电源状态和工作模式：
- 只有 On + MemoryMode 时总线才能读写
- On/ClockGated/Retentive 之间切换保留内容
- 从 Off 上电后内容清零
字节序为小端（RISC-V 约定）。
"""

from dataclasses import dataclass
from enum import Enum
from typing import Optional

from config.platform_config import TimingConfig
from sim.errors import ContractViolation, IllegalTransition, SlaveError


class PowerState(str, Enum):
    ON = "On"
    CLOCK_GATED = "ClockGated"
    RETENTIVE = "Retentive"
    OFF = "Off"


def leakage_fraction(state: PowerState, retention_fraction: float) -> float:
    """各电源状态下的漏电比例"""
    if state in (PowerState.ON, PowerState.CLOCK_GATED):
        return 1.0
    if state is PowerState.RETENTIVE:
        return retention_fraction
    return 0.0


class BankMode(str, Enum):
    MEMORY = "MemoryMode"
    COMPUTE = "ComputeMode"


class AccessKind(str, Enum):
    READ = "Read"
    WRITE = "Write"


@dataclass(frozen=True)
class PendingTransition:
    """一次尚未完成的电源状态转换"""

    target: PowerState
    complete_at: int
    generation: int


def transition_latency(current: PowerState, target: PowerState, timing: TimingConfig) -> int:
    """
    状态转换延迟（周期）

    进入 Off/ClockGated/Retentive 为 gate_latency；Retentive->On 为 retention_wake_latency；
    Off->On 为 power_up_latency；ClockGated->On 为 ungate_latency；相同状态为0。
    """
    if current is target:
        return 0
    if target is not PowerState.ON:
        return timing.gate_latency
    if current is PowerState.OFF:
        return timing.power_up_latency
    if current is PowerState.RETENTIVE:
        return timing.retention_wake_latency
    return timing.ungate_latency


class MemoryBank:
    """一个SRAM存储体"""

    def __init__(self, index: int, size_bytes: int, timing: TimingConfig = TimingConfig(), gateable: bool = True):
        self.index = index
        self.size_bytes = size_bytes
        self.contents = bytearray(size_bytes)
        self.power_state = PowerState.ON
        self.mode = BankMode.MEMORY
        self.gateable = gateable
        self.timing = timing
        self.pending: Optional[PendingTransition] = None
        self._generation = 0

    @property
    def name(self) -> str:
        return f"bank{self.index}"

    @property
    def bus_accessible(self) -> bool:
        return self.power_state is PowerState.ON and self.mode is BankMode.MEMORY

    def _check_range(self, offset: int, width: int) -> None:
        if offset < 0 or offset + width > self.size_bytes:
            raise ContractViolation(
                f"{self.name}: access [{offset}, {offset + width}) outside {self.size_bytes} bytes"
            )

    def access(self, offset: int, kind: AccessKind, width: int, data: Optional[int] = None) -> Optional[int]:
        """
        总线访问

        Args:
            offset: 存储体内偏移
            kind: 读或写
            width: 访问宽度（字节）
            data: 写入值

        Returns:
            读访问返回小端整数，写访问返回None

        Raises:
            SlaveError: 存储体不是 On + MemoryMode
            ContractViolation: 偏移越界（译码层缺陷）
        """
        self._check_range(offset, width)
        if not self.bus_accessible:
            raise SlaveError(f"{self.name} is {self.power_state.value}/{self.mode.value}")
        if kind is AccessKind.READ:
            return int.from_bytes(self.contents[offset:offset + width], "little")
        value = (data or 0) & ((1 << (8 * width)) - 1)
        self.contents[offset:offset + width] = value.to_bytes(width, "little")
        return None

    # 后门访问：加载/导出镜像以及存内计算，不经过总线也不检查电源状态

    def load(self, offset: int, payload: bytes) -> None:
        self._check_range(offset, len(payload))
        self.contents[offset:offset + len(payload)] = payload

    def dump(self, offset: int = 0, length: Optional[int] = None) -> bytes:
        if length is None:
            length = self.size_bytes - offset
        self._check_range(offset, length)
        return bytes(self.contents[offset:offset + length])

    def read_word(self, offset: int) -> int:
        self._check_range(offset, 4)
        return int.from_bytes(self.contents[offset:offset + 4], "little")

    def write_word(self, offset: int, value: int) -> None:
        self._check_range(offset, 4)
        self.contents[offset:offset + 4] = (value & 0xFFFF_FFFF).to_bytes(4, "little")

    def set_power_state(self, target: PowerState, now: int) -> PendingTransition:
        """
        发起电源状态转换

        新请求会取代尚未完成的旧请求；相同状态立即完成。

        Returns:
            PendingTransition: 由调用方在 complete_at 周期调度完成事件

        Raises:
            IllegalTransition: 不可门控的存储体被要求离开 On
        """
        if not self.gateable and target is not PowerState.ON:
            raise IllegalTransition(f"{self.name} is not gateable")
        self._generation += 1
        latency = transition_latency(self.power_state, target, self.timing)
        self.pending = PendingTransition(target, now + latency, self._generation)
        if latency == 0:
            self.finish_transition(self.pending)
        return self.pending

    def finish_transition(self, transition: PendingTransition) -> bool:
        """在完成周期应用状态；过期的转换被忽略并返回False"""
        if self.pending is None or transition.generation != self.pending.generation:
            return False
        previous = self.power_state
        self.power_state = transition.target
        self.pending = None
        # 进入 Off 即丢失内容，后门导出也只能看到零；离开 Off 时同样清零
        if PowerState.OFF in (previous, transition.target) and previous is not transition.target:
            self.contents = bytearray(self.size_bytes)
        return True
