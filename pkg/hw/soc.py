#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
平台组装

按配置创建存储体、总线、DMA、电源管理器、中断控制器、外设和加速器插槽，
并按固定顺序注册到引擎：cpu, dma, accel{slot}..., power, irq, timer, bus。
总线最后注册，同一周期内发出的请求都能赶上本周期的仲裁。
"""

import logging
from typing import Dict, List, Optional

from config.address_map import AddressMap, RegionKind, build_address_map
from config.platform_config import Peripheral, PlatformConfig, XaifMasterMode
from hw.cpu import DATA_MASTER, Cpu, Directive
from hw.dma import DmaEngine
from hw.interconnect import Bus
from hw.memory import MemoryBank, PowerState
from hw.peripherals import RegisterFile, TimerPeripheral
from hw.power import InterruptController, InterruptSource, PowerManager
from hw.xaif import AcceleratorSockets, XaifSocket, build_accelerator
from sim.engine import Engine, RunSummary

logger = logging.getLogger(__name__)

DEBUG_MASTER = "debug"

# 队列耗尽前一直运行
UNBOUNDED = (1 << 63) - 1


class Soc:
    """一个平台实例，持有全部硬件模型"""

    def __init__(self, config: PlatformConfig, trace=None):
        self.config = config
        self.engine = Engine(trace)
        self.address_map: AddressMap = build_address_map(config)
        timing = config.timing

        self.banks: List[MemoryBank] = [
            MemoryBank(i, config.bank_size_bytes, timing, config.is_bank_gateable(i))
            for i in range(config.bank_count)
        ]
        self.bus = Bus(self.engine, self.address_map, config.bus_topology, timing, config.arbitration)
        self.bus.register_master(DATA_MASTER)

        self.irq = InterruptController(self.engine, timing.interrupt_latency)
        self.power = PowerManager(self.engine, config, self.banks)
        # 中断线分配顺序：DMA通道、加速器插槽、定时器、外部中断
        self.dma = DmaEngine(self.engine, self.bus, self.irq, self.address_map, config.dma_channel_count)
        self.sockets = AcceleratorSockets([self._make_socket(slot) for slot in range(config.accelerator_slots)])

        peripheral_on = self._peripheral_powered
        self.timer: Optional[TimerPeripheral] = None
        if Peripheral.TIMER in config.peripherals:
            self.timer = TimerPeripheral(
                self.engine,
                self.irq,
                self.irq.allocate(InterruptSource.TIMER),
                self.address_map.region("timer").size_bytes,
                peripheral_on,
            )
        self.external_line = self.irq.allocate(InterruptSource.EXTERNAL)
        self.bus.register_master(DEBUG_MASTER)

        self._attach_slaves(peripheral_on)

        self.cpu = Cpu(
            self.engine,
            self.bus,
            self.power,
            self.irq,
            self.dma,
            self.sockets,
            self.banks,
            timer=self.timer,
            external_line=self.external_line,
        )
        self.irq.attach_cpu(self.cpu)

        self.engine.register(self.cpu)
        self.engine.register(self.dma)
        for socket in self.sockets:
            self.engine.register(socket)
        self.engine.register(self.power)
        self.engine.register(self.irq)
        if self.timer is not None:
            self.engine.register(self.timer)
        self.engine.register(self.bus)

        for entry in config.accelerators:
            self.sockets.attach(build_accelerator(entry, self.banks), entry.slot)

    @classmethod
    def build(cls, config: PlatformConfig, trace=None) -> "Soc":
        return cls(config, trace)

    def _peripheral_powered(self) -> bool:
        return self.power.state("peripheral") is PowerState.ON

    def _master_ports(self, slot: int) -> List[str]:
        entry = next((e for e in self.config.accelerators if e.slot == slot), None)
        ports = entry.master_ports if entry is not None else 1
        if self.config.xaif_master_mode is XaifMasterMode.SHARED_DMA:
            channels = self.config.dma_channel_count
            return sorted({f"dma{(slot + j) % channels}" for j in range(ports)})
        return [f"accel{slot}.m{j}" for j in range(ports)]

    def _make_socket(self, slot: int) -> XaifSocket:
        line = self.irq.allocate(InterruptSource.ACCELERATOR, slot)
        masters = self._master_ports(slot)
        if self.config.xaif_master_mode is XaifMasterMode.DEDICATED:
            for master in masters:
                self.bus.register_master(master)
        return XaifSocket(
            self.engine,
            slot,
            self.address_map.region(f"accel{slot}"),
            line,
            self.power,
            self.irq,
            self.bus,
            masters,
        )

    def _attach_slaves(self, peripheral_on) -> None:
        for bank in self.banks:
            self.bus.attach_slave(bank.name, bank)
        for region in self.address_map.of_kind(RegionKind.PERIPHERAL):
            if self.timer is not None and region.name == "timer":
                self.bus.attach_slave(region.name, self.timer)
            else:
                self.bus.attach_slave(region.name, RegisterFile(region.name, region.size_bytes, peripheral_on))
        ao = self.address_map.region("ao")
        self.bus.attach_slave(ao.name, RegisterFile(ao.name, ao.size_bytes))
        for socket in self.sockets:
            self.bus.attach_slave(socket.slave_window.name, socket)

    def run(self, program: List[Directive], limit: int = UNBOUNDED) -> RunSummary:
        """
        执行一段程序直到事件队列耗尽（或到达 limit）

        Returns:
            RunSummary: 活动计数器与各电源域驻留周期
        """
        self.cpu.load_program(program)
        summary = self.engine.run_until(limit)
        summary.events_processed = self.engine.events_processed
        summary.residency = self.power.residency(summary.final_time)
        if not self.cpu.finished:
            logger.warning("[WARN] 仿真在周期 %d 停止时CPU程序尚未结束（睡眠=%s）", summary.final_time, self.cpu.sleeping)
        return summary

    def status(self) -> Dict:
        """运行后的平台状态，用于报告"""
        return {
            "cpu": {
                "finished": self.cpu.finished,
                "finished_at": self.cpu.finished_at,
                "sleeping": self.cpu.sleeping,
                "sleeps": self.cpu.sleeps,
                "interrupts": [line.name for line in self.cpu.handled],
                "accesses": list(self.cpu.log),
            },
            "bus": self.bus.conservation(),
            "dma": [
                {
                    "channel": c.index,
                    "status": c.status.value,
                    "elements": c.elements_done,
                    "start": c.start_cycle,
                    "end": c.end_cycle,
                    "error": c.error,
                }
                for c in self.dma.channels
            ],
            "accelerators": [
                {
                    "slot": s.slot,
                    "model": s.model.model_name if s.model else None,
                    "state": s.model.state.value if s.model else None,
                    "completed": s.done_count,
                }
                for s in self.sockets
            ],
            "power": {name: state.value for name, state in self.power.states().items()},
            "always_on_held": self.power.always_on_holds(),
        }
