#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
主机CPU的事务级模型

CPU 不解释指令，只按顺序执行场景程序里的指令条目（directive）：
计算若干周期、总线读写、电源命令、启动DMA、卸载到加速器、等待中断等。
程序用生成器实现，每个条目 yield 一个等待条件，事件到来时继续执行。
"""

import logging
from pathlib import Path
from typing import Annotated, Any, Dict, Generator, List, Literal, Optional, Union

from pydantic import BaseModel, BeforeValidator, ConfigDict, Field

from hw.dma import DmaDescriptor, DmaEngine
from hw.interconnect import Bus, BusResponse, BusTransaction
from hw.memory import AccessKind, MemoryBank, PowerState
from hw.peripherals import TimerPeripheral
from hw.power import InterruptController, InterruptLine, InterruptSource, PowerManager
from hw.xaif import AcceleratorSockets, OffloadCommand
from sim.engine import Component, Engine, Event, EventKind
from sim.errors import ConfigError, ContractViolation, SlaveError

logger = logging.getLogger(__name__)

DATA_MASTER = "cpu-data"


def _parse_int(value: Any) -> Any:
    """允许 "0x..." 形式的地址"""
    if isinstance(value, str):
        try:
            return int(value, 0)
        except ValueError:
            return value
    return value


Word = Annotated[int, BeforeValidator(_parse_int)]


class _Directive(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class Compute(_Directive):
    """CPU 满负荷计算 N 个周期，activity 为开关活动度"""

    op: Literal["compute"] = "compute"
    cycles: int = Field(ge=0)
    activity: float = Field(1.0, ge=0)
    label: str = ""


class Read(_Directive):
    op: Literal["read"] = "read"
    address: Word
    width: Literal[1, 2, 4] = 4


class Write(_Directive):
    op: Literal["write"] = "write"
    address: Word
    value: Word
    width: Literal[1, 2, 4] = 4


class PowerCommand(_Directive):
    """wait 为真时等到转换完成再继续"""

    op: Literal["power"] = "power"
    domain: str
    state: PowerState
    wait: bool = False


class StartDma(_Directive):
    op: Literal["dma"] = "dma"
    descriptor: DmaDescriptor
    wait: bool = False


class Offload(_Directive):
    """卸载到插槽；wait 为真时 CPU 睡眠直到加速器中断"""

    op: Literal["offload"] = "offload"
    slot: int = 0
    element_count: int = Field(ge=0)
    kernel_id: int = 0
    scale: int = 1
    bias: int = 0
    offset: int = 0
    activity: float = Field(1.0, ge=0)
    wait: bool = True

    def command(self) -> OffloadCommand:
        return OffloadCommand(
            element_count=self.element_count,
            kernel_id=self.kernel_id,
            scale=self.scale,
            bias=self.bias,
            offset=self.offset,
            activity=self.activity,
        )


class WaitForInterrupt(_Directive):
    op: Literal["wait-for-interrupt"] = "wait-for-interrupt"


class LoadImage(_Directive):
    """从原始二进制文件加载存储体内容（后门，不占用周期）"""

    op: Literal["load"] = "load"
    bank: int
    offset: int = 0
    file: str


class DumpImage(_Directive):
    op: Literal["dump"] = "dump"
    bank: int
    offset: int = 0
    length: Optional[int] = None
    file: str


class ArmTimer(_Directive):
    op: Literal["timer"] = "timer"
    cycles: int = Field(ge=1)


class RaiseExternal(_Directive):
    op: Literal["irq"] = "irq"


Directive = Union[
    Compute,
    Read,
    Write,
    PowerCommand,
    StartDma,
    Offload,
    WaitForInterrupt,
    LoadImage,
    DumpImage,
    ArmTimer,
    RaiseExternal,
]


class _Delay:
    def __init__(self, cycles: int):
        self.cycles = cycles


class _BusWait:
    pass


class _Sleep:
    pass


class Cpu(Component):
    """
    执行场景程序的CPU

    计算周期同时计入一次取指（总线授权 + 取指存储体访问）；
    睡眠期间处于 ClockGated，不产生动态能耗。
    """

    name = "cpu"

    def __init__(
        self,
        engine: Engine,
        bus: Bus,
        power: PowerManager,
        irq: InterruptController,
        dma: DmaEngine,
        sockets: AcceleratorSockets,
        banks: List[MemoryBank],
        timer: Optional[TimerPeripheral] = None,
        external_line: Optional[InterruptLine] = None,
        fetch_bank: str = "bank0",
    ):
        self.engine = engine
        self.bus = bus
        self.power = power
        self.irq = irq
        self.dma = dma
        self.sockets = sockets
        self.banks = banks
        self.timer = timer
        self.external_line = external_line
        self.fetch_bank = fetch_bank
        self.sleeping = False
        self.finished = False
        self.finished_at: Optional[int] = None
        self.handled: List[InterruptLine] = []
        self.log: List[Dict[str, Any]] = []
        self.sleeps = 0
        self._program: Optional[Generator] = None

    def load_program(self, directives: List[Directive]) -> None:
        """装载程序，本周期开始执行"""
        if self._program is not None and not self.finished:
            raise ContractViolation("cpu program still running")
        self._program = self._run(list(directives))
        self.finished = False
        self.finished_at = None
        self.engine.schedule(Event(self.engine.now, self.name, EventKind.CUSTOM, tag="start"))

    def _run(self, directives: List[Directive]):
        for directive in directives:
            yield from self._execute(directive)

    def _advance(self, value=None) -> None:
        try:
            condition = self._program.send(value)
        except StopIteration:
            self.finished = True
            self.finished_at = self.engine.now
            logger.debug("[OK] CPU 程序结束 @%d", self.engine.now)
            return
        if isinstance(condition, _Delay):
            self.engine.schedule(
                Event(self.engine.now + condition.cycles, self.name, EventKind.CUSTOM, tag="step")
            )
        elif isinstance(condition, _Sleep):
            self.sleeping = True
            self.sleeps += 1
            self.power.request_transition("cpu", PowerState.CLOCK_GATED)

    def handle(self, event: Event) -> None:
        if event.kind is EventKind.CPU_RESUME:
            self.irq.resume_delivered()
            self.power.wake_cpu()
            self.sleeping = False
            self._advance()
        elif event.kind is EventKind.CUSTOM:
            self._advance()
        else:
            raise ContractViolation(f"cpu cannot handle {event.payload()}")

    def _bus_access(
        self, address: int, kind: AccessKind, width: int, data: Optional[int] = None, record: bool = True
    ):
        self.bus.issue(
            BusTransaction(
                master_id=DATA_MASTER,
                address=address,
                kind=kind,
                width_bytes=width,
                data=data,
                on_response=self._advance,
            )
        )
        response: BusResponse = yield _BusWait()
        if not record:
            return response
        self.log.append(
            {
                "op": kind.value.lower(),
                "address": f"0x{address:08X}",
                "status": response.status.value,
                "value": response.data,
                "cycle": response.complete_cycle,
            }
        )
        return response

    def _wait_for(self, *lines: InterruptLine):
        """睡眠直到收到中断；指定 lines 时直到其中任一条线的中断被处理"""
        while True:
            consumed = self.irq.consume()
            self.handled.extend(consumed)
            if consumed and (not lines or any(line in consumed for line in lines)):
                return
            yield _Sleep()

    def _execute(self, d: Directive):
        if isinstance(d, Compute):
            if d.cycles == 0:
                return
            self.engine.count(self.name, "active_cycles", d.cycles)
            self.engine.count(self.name, "cpu_active_cycle", d.cycles * d.activity)
            # 取指：每个周期一次总线授权和一次存储体访问
            self.engine.count("bus", "bus_grant", d.cycles)
            self.engine.count(self.fetch_bank, "mem_access", d.cycles)
            yield _Delay(d.cycles)
        elif isinstance(d, Read):
            yield from self._bus_access(d.address, AccessKind.READ, d.width)
        elif isinstance(d, Write):
            yield from self._bus_access(d.address, AccessKind.WRITE, d.width, d.value)
        elif isinstance(d, PowerCommand):
            if d.domain == "cpu":
                raise ConfigError("the cpu domain is gated by wait-for-interrupt, not by a power command")
            pending = self.power.request_transition(d.domain, d.state)
            if d.wait and pending.complete_at > self.engine.now:
                yield _Delay(pending.complete_at - self.engine.now)
        elif isinstance(d, StartDma):
            channel = self.dma.configure_and_start(d.descriptor)
            if d.wait:
                yield from self._wait_for(channel.line, channel.error_line)
        elif isinstance(d, Offload):
            socket = self.sockets.socket(d.slot)
            # 命令寄存器经从设备窗口逐个写入，写 CTRL 启动加速器
            for address, value in socket.offload(d.command()):
                response = yield from self._bus_access(address, AccessKind.WRITE, 4, value, record=False)
                if not response.ok:
                    raise SlaveError(f"{socket.name} rejected offload write at 0x{address:08X}: {response.message}")
            if d.wait:
                yield from self._wait_for(socket.irq_line)
        elif isinstance(d, WaitForInterrupt):
            yield from self._wait_for()
        elif isinstance(d, LoadImage):
            self._bank(d.bank).load(d.offset, Path(d.file).read_bytes())
        elif isinstance(d, DumpImage):
            Path(d.file).write_bytes(self._bank(d.bank).dump(d.offset, d.length))
        elif isinstance(d, ArmTimer):
            if self.timer is None:
                raise ConfigError("timer directive needs the Timer peripheral")
            self.timer.arm(d.cycles)
        elif isinstance(d, RaiseExternal):
            self.irq.raise_line(self.external_line or self.irq.line(InterruptSource.EXTERNAL))
        else:
            raise ContractViolation(f"unknown directive {d!r}")

    def _bank(self, index: int) -> MemoryBank:
        if not 0 <= index < len(self.banks):
            raise ConfigError(f"bank {index} does not exist")
        return self.banks[index]
