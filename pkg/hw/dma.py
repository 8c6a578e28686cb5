#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
多通道DMA

每个通道执行一个 1D/2D 跨步描述符：逐元素先读后写，
每个通道同时最多一个在途事务，仲裁交给总线。
最后一个元素写完后投递 DmaChannelDone 并触发该通道的中断线。
"""

import logging
from enum import Enum
from typing import List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator

from config.address_map import AddressMap
from hw.interconnect import Bus, BusResponse, BusTransaction
from hw.memory import AccessKind
from hw.power import InterruptController, InterruptLine, InterruptSource
from sim.engine import Component, Engine, Event, EventKind
from sim.errors import ChannelBusy, ConfigError, ContractViolation

logger = logging.getLogger(__name__)

ADDRESS_LIMIT = 1 << 32


class DmaDescriptor(BaseModel):
    """
    一次 1D/2D 传输程序

    outer_count 为1即1D传输；跨步以字节为单位，可以为负。
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    channel: int = 0
    src_base: int
    dst_base: int
    element_size_bytes: int = 4
    inner_count: int = Field(1, ge=1)
    outer_count: int = Field(1, ge=1)
    src_inner_stride: int = 0
    src_outer_stride: int = 0
    dst_inner_stride: int = 0
    dst_outer_stride: int = 0

    @field_validator("element_size_bytes")
    @classmethod
    def _check_element_size(cls, value: int) -> int:
        if value not in (1, 2, 4):
            raise ValueError("element_size_bytes must be 1, 2 or 4")
        return value

    @property
    def total_elements(self) -> int:
        return self.inner_count * self.outer_count


def address_sequence(desc: DmaDescriptor, address_map: Optional[AddressMap] = None) -> List[Tuple[int, int]]:
    """
    枚举描述符产生的 (src, dst) 地址对，外层 j、内层 i 行优先

    Args:
        desc: 描述符
        address_map: 给定时检查每个元素完整落在某个区域内

    Raises:
        ConfigError: 地址超出32位范围或无法译码
    """
    pairs = []
    for j in range(desc.outer_count):
        for i in range(desc.inner_count):
            src = desc.src_base + j * desc.src_outer_stride + i * desc.src_inner_stride
            dst = desc.dst_base + j * desc.dst_outer_stride + i * desc.dst_inner_stride
            pairs.append((src, dst))

    width = desc.element_size_bytes
    for src, dst in pairs:
        for role, address in (("src", src), ("dst", dst)):
            if not 0 <= address <= ADDRESS_LIMIT - width:
                raise ConfigError(f"dma {role} address {address:#x} out of the 32-bit range")
            if address_map is None:
                continue
            region = address_map.find(address)
            if region is None or not region.contains(address + width - 1):
                raise ConfigError(f"dma {role} address 0x{address:08X} does not decode to a region")
    return pairs


class ChannelStatus(str, Enum):
    IDLE = "Idle"
    BUSY = "Busy"
    DONE = "Done"
    ERROR = "Error"


class DmaChannel:
    """一个DMA通道的运行状态"""

    def __init__(self, index: int, line: InterruptLine, error_line: Optional[InterruptLine] = None):
        self.index = index
        self.line = line
        # 传输中止走单独的错误中断线
        self.error_line = error_line or line
        self.status = ChannelStatus.IDLE
        self.descriptor: Optional[DmaDescriptor] = None
        self.sequence: List[Tuple[int, int]] = []
        self.position = 0
        self.observed: List[Tuple[int, int]] = []
        self.start_cycle: Optional[int] = None
        self.end_cycle: Optional[int] = None
        self.error: str = ""

    @property
    def master_id(self) -> str:
        return f"dma{self.index}"

    @property
    def active(self) -> bool:
        return self.status is ChannelStatus.BUSY

    @property
    def elements_done(self) -> int:
        return len(self.observed)


class DmaEngine(Component):
    """DMA引擎组件：通道 k 以 dma{k} 的身份做总线主设备"""

    name = "dma"

    def __init__(self, engine: Engine, bus: Bus, irq: InterruptController, address_map: AddressMap, channel_count: int):
        self.engine = engine
        self.bus = bus
        self.address_map = address_map
        self.irq = irq
        self.channels: List[DmaChannel] = []
        for k in range(channel_count):
            channel = DmaChannel(
                k,
                irq.allocate(InterruptSource.DMA_CHANNEL, k),
                irq.allocate(InterruptSource.DMA_ERROR, k),
            )
            bus.register_master(channel.master_id)
            self.channels.append(channel)

    def channel(self, index: int) -> DmaChannel:
        if not 0 <= index < len(self.channels):
            raise ConfigError(f"dma channel {index} does not exist")
        return self.channels[index]

    def configure_and_start(self, desc: DmaDescriptor) -> DmaChannel:
        """
        配置并启动通道

        地址在启动时全部检查；启动后第一个读事务在当前周期发出。

        Returns:
            DmaChannel: 通道句柄，status 为 Busy

        Raises:
            ChannelBusy: 通道仍在传输
            ConfigError: 通道不存在或地址无法译码
        """
        channel = self.channel(desc.channel)
        if channel.active:
            raise ChannelBusy(f"dma channel {desc.channel} is busy")
        sequence = address_sequence(desc, self.address_map)

        channel.descriptor = desc
        channel.sequence = sequence
        channel.position = 0
        channel.observed = []
        channel.status = ChannelStatus.BUSY
        channel.start_cycle = self.engine.now
        channel.end_cycle = None
        channel.error = ""
        logger.debug("[SEND] dma%d 启动，%d 个元素", channel.index, len(sequence))
        self._issue_read(channel)
        return channel

    def _issue_read(self, channel: DmaChannel) -> None:
        src, _ = channel.sequence[channel.position]
        self.bus.issue(
            BusTransaction(
                master_id=channel.master_id,
                address=src,
                kind=AccessKind.READ,
                width_bytes=channel.descriptor.element_size_bytes,
                on_response=lambda response: self._on_read(channel, response),
            )
        )

    def _on_read(self, channel: DmaChannel, response: BusResponse) -> None:
        if not response.ok:
            self._abort(channel, response)
            return
        _, dst = channel.sequence[channel.position]
        self.bus.issue(
            BusTransaction(
                master_id=channel.master_id,
                address=dst,
                kind=AccessKind.WRITE,
                width_bytes=channel.descriptor.element_size_bytes,
                data=response.data,
                on_response=lambda r: self._on_write(channel, r),
            )
        )

    def _on_write(self, channel: DmaChannel, response: BusResponse) -> None:
        if not response.ok:
            self._abort(channel, response)
            return
        channel.observed.append(channel.sequence[channel.position])
        self.engine.count(self.name, "dma_element")
        self.engine.schedule(
            Event(
                self.engine.now,
                self.name,
                EventKind.DMA_ELEMENT_DONE,
                tag=f"ch={channel.index} element={channel.position}",
                data=channel.index,
            )
        )

    def _abort(self, channel: DmaChannel, response: BusResponse) -> None:
        channel.status = ChannelStatus.ERROR
        channel.error = response.message or response.status.value
        logger.warning("[ERROR] dma%d 传输中止: %s", channel.index, channel.error)
        self._finish(channel)

    def _finish(self, channel: DmaChannel) -> None:
        channel.end_cycle = self.engine.now
        self.engine.schedule(
            Event(
                self.engine.now,
                self.name,
                EventKind.DMA_CHANNEL_DONE,
                tag=f"ch={channel.index} status={channel.status.value}",
                data=channel.index,
            )
        )

    def handle(self, event: Event) -> None:
        channel = self.channels[event.data]
        if event.kind is EventKind.DMA_ELEMENT_DONE:
            channel.position += 1
            if channel.position < len(channel.sequence):
                self._issue_read(channel)
            else:
                channel.status = ChannelStatus.DONE
                self._finish(channel)
        elif event.kind is EventKind.DMA_CHANNEL_DONE:
            logger.debug("[OK] dma%d 结束 @%d (%s)", channel.index, self.engine.now, channel.status.value)
            failed = channel.status is ChannelStatus.ERROR
            self.irq.raise_line(channel.error_line if failed else channel.line)
        else:
            raise ContractViolation(f"dma cannot handle {event.payload()}")

    def idle(self) -> bool:
        return not any(c.active for c in self.channels)
