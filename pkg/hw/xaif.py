#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
加速器插槽（XAIF）

每个插槽捆绑一个从设备窗口、若干总线主端口、一条中断线和一个电源域。
加速器模型按名字注册，配置文件里的条目通过名字创建模型。
"""

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Type

from config.address_map import Region
from config.platform_config import AcceleratorEntry
from hw.interconnect import Bus, BusTransaction
from hw.memory import AccessKind, BankMode, MemoryBank, PowerState
from hw.power import InterruptController, InterruptLine, PowerManager
from sim.engine import Component, Engine, Event, EventKind
from sim.errors import (
    AcceleratorBusy,
    ConfigError,
    ContractViolation,
    NoSuchSlot,
    PoweredDown,
    SlaveError,
    SlotOccupied,
)

logger = logging.getLogger(__name__)

_REGISTRY: Dict[str, Type["AcceleratorModel"]] = {}


def register_accelerator(name: str) -> Callable[[Type["AcceleratorModel"]], Type["AcceleratorModel"]]:
    """类装饰器：按名字登记加速器模型"""

    def decorator(cls):
        if name in _REGISTRY and _REGISTRY[name] is not cls:
            raise ContractViolation(f"accelerator model {name!r} registered twice")
        cls.model_name = name
        _REGISTRY[name] = cls
        return cls

    return decorator


def known_accelerator_models() -> List[str]:
    return sorted(_REGISTRY)


def build_accelerator(entry: AcceleratorEntry, banks: Sequence[MemoryBank]) -> "AcceleratorModel":
    """
    按配置条目创建模型

    Raises:
        ConfigError: 模型名未登记或参数不合法
    """
    cls = _REGISTRY.get(entry.model)
    if cls is None:
        raise ConfigError(f"unknown accelerator model {entry.model!r}")
    return cls.from_params(entry.params, banks)


class AccelState(str, Enum):
    IDLE = "Idle"
    BUSY = "Busy"
    DONE = "Done"


class AcceleratorModel(ABC):
    """
    加速器行为约定

    模型只在插槽提供的当前周期上工作，不能有内部线程，也不能有可观察到的不确定性。
    next_event() 告诉插槽何时调用 step()；step() 返回 True 表示本次从 Busy 变为 Done。
    """

    model_name = "abstract"

    def __init__(self):
        self.state = AccelState.IDLE
        self.socket: Optional["XaifSocket"] = None

    @classmethod
    def from_params(cls, params: Dict, banks: Sequence[MemoryBank]) -> "AcceleratorModel":
        return cls()

    def bind(self, socket: "XaifSocket") -> None:
        self.socket = socket

    @property
    def now(self) -> int:
        return self.socket.engine.now if self.socket else 0

    @abstractmethod
    def reset(self) -> None:
        """回到 Idle，不触发中断"""

    @abstractmethod
    def window_read(self, offset: int) -> int:
        ...

    @abstractmethod
    def window_write(self, offset: int, value: int) -> None:
        ...

    @abstractmethod
    def step(self, cycle: int) -> bool:
        ...

    def next_event(self) -> Optional[int]:
        return None

    def freeze(self, cycle: int) -> None:
        """时钟门控：暂停"""

    def thaw(self, cycle: int) -> None:
        """解除时钟门控：继续"""

    def take_active_cycles(self) -> float:
        """取走自上次调用以来的加权活动周期数（能量计数用）"""
        return 0.0


# NearMemVector 窗口寄存器偏移
REG_CTRL = 0x00
REG_STATUS = 0x04
REG_KERNEL = 0x08
REG_COUNT = 0x0C
REG_SCALE = 0x10
REG_BIAS = 0x14
REG_OFFSET = 0x18
REG_ACTIVITY = 0x1C

KERNEL_TIMED = 0
KERNEL_SCALE_ADD = 1

_STATUS_CODE = {AccelState.IDLE: 0, AccelState.BUSY: 1, AccelState.DONE: 2}


@register_accelerator("nm-vector")
class NearMemVector(AcceleratorModel):
    """
    嵌入某个存储体的近存向量加速器

    Busy 期间该存储体处于 ComputeMode，总线访问得到 SlaveError；
    忙碌时长为 ceil(element_count * cycles_per_element) 周期。
    kernel 1 在存储体内逐字执行 word = word * scale + bias (mod 2^32)。
    """

    def __init__(self, bank: MemoryBank, cycles_per_element: Fraction = Fraction(1)):
        super().__init__()
        if cycles_per_element <= 0:
            raise ConfigError("cycles_per_element must be positive")
        self.bank = bank
        self.cycles_per_element = Fraction(cycles_per_element)
        self.registers = self._blank_registers()
        self.offloads = 0
        self._busy_until: Optional[int] = None
        self._remaining = 0
        self._active_since: Optional[int] = None
        self._active = 0

    @classmethod
    def from_params(cls, params: Dict, banks: Sequence[MemoryBank]) -> "NearMemVector":
        index = params.get("bank_index", len(banks) - 1)
        if not 0 <= index < len(banks):
            raise ConfigError(f"bank_index {index} does not exist")
        try:
            cpe = Fraction(str(params.get("cycles_per_element", 1)))
        except (ValueError, ZeroDivisionError):
            raise ConfigError(f"bad cycles_per_element {params.get('cycles_per_element')!r}") from None
        return cls(banks[index], cpe)

    @staticmethod
    def _blank_registers() -> Dict[int, int]:
        return {
            REG_KERNEL: 0,
            REG_COUNT: 0,
            REG_SCALE: 1,
            REG_BIAS: 0,
            REG_OFFSET: 0,
            REG_ACTIVITY: 1000,
        }

    def busy_cycles(self, element_count: int) -> int:
        return math.ceil(element_count * self.cycles_per_element)

    @property
    def activity(self) -> float:
        return self.registers[REG_ACTIVITY] / 1000

    def reset(self) -> None:
        self._stop_activity(self.now)
        self.state = AccelState.IDLE
        self.registers = self._blank_registers()
        self._busy_until = None
        self._remaining = 0
        self.bank.mode = BankMode.MEMORY

    def window_read(self, offset: int) -> int:
        if offset == REG_STATUS:
            return _STATUS_CODE[self.state]
        if offset == REG_CTRL:
            return 0
        return self.registers.get(offset, 0)

    def window_write(self, offset: int, value: int) -> None:
        if self.state is AccelState.BUSY:
            raise AcceleratorBusy(f"{self.model_name} busy until cycle {self._busy_until}")
        if offset == REG_CTRL:
            if value & 1:
                self._start()
            return
        if offset == REG_STATUS:
            return
        self.registers[offset] = value & 0xFFFF_FFFF

    def _start(self) -> None:
        count = self.registers[REG_COUNT]
        kernel = self.registers[REG_KERNEL]
        if kernel not in (KERNEL_TIMED, KERNEL_SCALE_ADD):
            raise SlaveError(f"unknown kernel {kernel}")
        if kernel == KERNEL_SCALE_ADD and self.registers[REG_OFFSET] + 4 * count > self.bank.size_bytes:
            raise SlaveError("kernel operands exceed the compute bank")
        now = self.now
        self.state = AccelState.BUSY
        self.bank.mode = BankMode.COMPUTE
        self._busy_until = now + self.busy_cycles(count)
        self._active_since = now
        self.offloads += 1

    def next_event(self) -> Optional[int]:
        if self.state is AccelState.BUSY:
            return self._busy_until
        return None

    def step(self, cycle: int) -> bool:
        if self.state is not AccelState.BUSY or self._busy_until is None or cycle < self._busy_until:
            return False
        if self.registers[REG_KERNEL] == KERNEL_SCALE_ADD:
            self._scale_add()
        self._stop_activity(cycle)
        self.state = AccelState.DONE
        self._busy_until = None
        self.bank.mode = BankMode.MEMORY
        return True

    def _scale_add(self) -> None:
        scale = self.registers[REG_SCALE]
        bias = self.registers[REG_BIAS]
        base = self.registers[REG_OFFSET]
        for i in range(self.registers[REG_COUNT]):
            offset = base + 4 * i
            self.bank.write_word(offset, self.bank.read_word(offset) * scale + bias)

    def freeze(self, cycle: int) -> None:
        if self.state is AccelState.BUSY and self._busy_until is not None:
            self._remaining = self._busy_until - cycle
            self._busy_until = None
            self._stop_activity(cycle)

    def thaw(self, cycle: int) -> None:
        if self.state is AccelState.BUSY and self._busy_until is None:
            self._busy_until = cycle + self._remaining
            self._active_since = cycle

    def _stop_activity(self, cycle: int) -> None:
        if self._active_since is not None:
            self._active += (cycle - self._active_since) * self.activity
            self._active_since = None

    def take_active_cycles(self) -> float:
        active, self._active = self._active, 0
        return active


@dataclass(frozen=True)
class OffloadCommand:
    """一次卸载：按寄存器顺序写入后置位 CTRL"""

    element_count: int
    kernel_id: int = KERNEL_TIMED
    scale: int = 1
    bias: int = 0
    offset: int = 0
    activity: float = 1.0

    def register_writes(self):
        return [
            (REG_KERNEL, self.kernel_id),
            (REG_COUNT, self.element_count),
            (REG_SCALE, self.scale),
            (REG_BIAS, self.bias),
            (REG_OFFSET, self.offset),
            (REG_ACTIVITY, round(self.activity * 1000)),
        ]


class XaifSocket(Component):
    """一个加速器插槽，组件名与电源域、地址区域同名：accel{slot}"""

    def __init__(
        self,
        engine: Engine,
        slot: int,
        window: Region,
        irq_line: InterruptLine,
        power: PowerManager,
        irq: InterruptController,
        bus: Bus,
        master_port_ids: Sequence[str],
    ):
        self.engine = engine
        self.slot = slot
        self.name = f"accel{slot}"
        self.slave_window = window
        self.irq_line = irq_line
        self.power_domain = self.name
        self.master_port_ids = list(master_port_ids)
        self.model: Optional[AcceleratorModel] = None
        self.done_count = 0
        self._power = power
        self._irq = irq
        self._bus = bus
        self._generation = 0
        power.subscribe(self.power_domain, self._on_power_change)

    @property
    def powered(self) -> bool:
        return self._power.state(self.power_domain) is PowerState.ON

    def access(self, offset: int, kind: AccessKind, width: int, data: Optional[int] = None) -> Optional[int]:
        """从设备窗口的总线访问"""
        if not self.powered:
            raise SlaveError(f"{self.name} is {self._power.state(self.power_domain).value}")
        if self.model is None:
            raise SlaveError(f"{self.name} is empty")
        if kind is AccessKind.READ:
            return self.model.window_read(offset)
        try:
            self.model.window_write(offset, data or 0)
        except AcceleratorBusy as e:
            raise SlaveError(str(e)) from e
        self._reschedule()
        return None

    def offload(self, command: OffloadCommand) -> List[Tuple[int, int]]:
        """
        检查卸载前置条件，给出经从设备窗口下发命令的总线写序列

        写 CTRL 的那次访问在授权周期启动加速器；命令流量和其他主设备一样参与仲裁。

        Returns:
            List[Tuple[int, int]]: (地址, 值)，最后一项置位 CTRL

        Raises:
            PoweredDown: 电源域不是 On
            AcceleratorBusy: 加速器仍在忙
            ConfigError: 插槽为空
        """
        if not self.powered:
            raise PoweredDown(f"{self.name} is {self._power.state(self.power_domain).value}")
        if self.model is None:
            raise ConfigError(f"{self.name} has no accelerator attached")
        if self.model.state is AccelState.BUSY:
            raise AcceleratorBusy(f"{self.name} is busy")
        logger.debug("[SEND] %s 卸载 %d 个元素 @%d", self.name, command.element_count, self.engine.now)
        base = self.slave_window.base
        return [(base + offset, value) for offset, value in command.register_writes()] + [(base + REG_CTRL, 1)]

    def issue(self, txn: BusTransaction) -> BusTransaction:
        """加速器通过自己的主端口访问总线"""
        if txn.master_id not in self.master_port_ids:
            raise ContractViolation(f"{txn.master_id!r} is not a master port of {self.name}")
        if not self.powered:
            raise PoweredDown(f"{self.name} is {self._power.state(self.power_domain).value}")
        return self._bus.issue(txn)

    def _reschedule(self) -> None:
        self._generation += 1
        when = self.model.next_event() if self.model else None
        if when is not None:
            self.engine.schedule(
                Event(when, self.name, EventKind.ACCEL_DONE, tag=f"slot={self.slot}", data=self._generation)
            )

    def _account(self) -> None:
        if self.model is not None:
            active = self.model.take_active_cycles()
            if active:
                self.engine.count(self.name, "accel_active_cycle", active)

    def _on_power_change(self, previous: PowerState, current: PowerState) -> None:
        if self.model is None:
            return
        now = self.engine.now
        if current is PowerState.ON:
            self.model.thaw(now)
            self._reschedule()
        elif current is PowerState.CLOCK_GATED:
            self.model.freeze(now)
            self._generation += 1
        else:
            # 断电：状态丢失，不产生中断
            self.model.reset()
            self._generation += 1
        self._account()

    def handle(self, event: Event) -> None:
        if event.kind is not EventKind.ACCEL_DONE:
            raise ContractViolation(f"{self.name} cannot handle {event.payload()}")
        if event.data != self._generation or self.model is None or not self.powered:
            return
        if self.model.step(self.engine.now):
            self.done_count += 1
            self._account()
            logger.debug("[OK] %s 完成 @%d", self.name, self.engine.now)
            self._irq.raise_line(self.irq_line)
        else:
            self._reschedule()


class AcceleratorSockets:
    """全部插槽；attach 把模型插进空插槽"""

    def __init__(self, sockets: Sequence[XaifSocket]):
        self._sockets = list(sockets)

    def __iter__(self):
        return iter(self._sockets)

    def __len__(self) -> int:
        return len(self._sockets)

    def socket(self, slot: int) -> XaifSocket:
        if not 0 <= slot < len(self._sockets):
            raise NoSuchSlot(f"slot {slot} does not exist ({len(self._sockets)} configured)")
        return self._sockets[slot]

    def attach(self, accel: AcceleratorModel, slot: int) -> XaifSocket:
        """
        把加速器接入插槽并复位

        Raises:
            NoSuchSlot: 插槽不存在
            SlotOccupied: 插槽已被占用
        """
        socket = self.socket(slot)
        if socket.model is not None:
            raise SlotOccupied(f"slot {slot} already holds {socket.model.model_name}")
        socket.model = accel
        accel.bind(socket)
        accel.reset()
        logger.info("[OK] %s 接入插槽 %d", accel.model_name, slot)
        return socket
