"""DMA 描述符与通道传输"""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from pydantic import ValidationError

from config.address_map import build_address_map
from config.platform_config import PlatformConfig
from hw.cpu import PowerCommand, StartDma
from hw.dma import ChannelStatus, DmaDescriptor, address_sequence
from hw.memory import PowerState
from hw.soc import Soc
from sim.errors import ChannelBusy, ConfigError

BANK = 4096
CONFIG = PlatformConfig(bank_count=2, bank_size_bytes=BANK)
SOURCE_IMAGE = bytes((i * 7 + 3) % 256 for i in range(BANK))


def fresh_soc() -> Soc:
    soc = Soc.build(CONFIG)
    soc.banks[0].load(0, SOURCE_IMAGE)
    return soc


@st.composite
def descriptors(draw):
    width = draw(st.sampled_from([1, 2, 4]))

    def stride(limit):
        return draw(st.integers(-limit, limit)) * width

    # 跨步最多偏移 ±480 字节，基址留出 512 字节余量
    def base(bank):
        return bank * BANK + draw(st.integers(512 // width, (BANK - 512) // width)) * width

    return DmaDescriptor(
        channel=draw(st.integers(0, 1)),
        src_base=base(0),
        dst_base=base(1),
        element_size_bytes=width,
        inner_count=draw(st.integers(1, 4)),
        outer_count=draw(st.integers(1, 4)),
        src_inner_stride=stride(8),
        src_outer_stride=stride(32),
        dst_inner_stride=stride(8),
        dst_outer_stride=stride(32),
    )


def test_address_sequence_is_row_major():
    desc = DmaDescriptor(
        src_base=0x100,
        dst_base=0x1100,
        inner_count=2,
        outer_count=2,
        src_inner_stride=4,
        src_outer_stride=0x40,
        dst_inner_stride=8,
        dst_outer_stride=-0x10,
    )
    assert address_sequence(desc) == [(0x100, 0x1100), (0x104, 0x1108), (0x140, 0x10F0), (0x144, 0x10F8)]


def test_one_dimensional_transfer_is_outer_count_one():
    desc = DmaDescriptor(src_base=0, dst_base=BANK, inner_count=3, src_inner_stride=4, dst_inner_stride=4)
    assert desc.total_elements == 3
    assert [d for _, d in address_sequence(desc)] == [BANK, BANK + 4, BANK + 8]


def test_element_size_must_be_1_2_or_4():
    with pytest.raises(ValidationError):
        DmaDescriptor(src_base=0, dst_base=0, element_size_bytes=3)


def test_undecodable_address_is_rejected_at_start():
    amap = build_address_map(CONFIG)
    desc = DmaDescriptor(src_base=0x1000_0000, dst_base=BANK)
    with pytest.raises(ConfigError):
        address_sequence(desc, amap)
    straddling = DmaDescriptor(src_base=BANK - 2, dst_base=BANK, element_size_bytes=4)
    with pytest.raises(ConfigError):
        address_sequence(straddling, amap)


@settings(max_examples=1000, deadline=None)
@given(descriptors())
def test_observed_transfers_match_address_sequence(desc):
    soc = fresh_soc()
    soc.run([StartDma(descriptor=desc, wait=True)])
    channel = soc.dma.channel(desc.channel)
    sequence = address_sequence(desc)

    assert channel.status is ChannelStatus.DONE
    assert channel.observed == sequence
    assert channel.elements_done == desc.total_elements
    assert soc.cpu.finished

    width = desc.element_size_bytes
    expected = {}
    for src, dst in sequence:
        expected[dst] = SOURCE_IMAGE[src:src + width]
    for dst, chunk in expected.items():
        assert soc.banks[1].dump(dst - BANK, width) == chunk


def test_transfer_raises_channel_interrupt():
    soc = fresh_soc()
    desc = DmaDescriptor(channel=1, src_base=0, dst_base=BANK, inner_count=4, src_inner_stride=4, dst_inner_stride=4)
    soc.run([StartDma(descriptor=desc, wait=True)])
    assert [line.name for line in soc.cpu.handled] == ["dma1"]
    channel = soc.dma.channel(1)
    assert channel.start_cycle == 0
    # 每个元素一次读授权、一次写授权，各占1个存储体延迟周期
    assert channel.end_cycle == 4 * (1 + 1)
    assert soc.bus.granted == 8
    # 中断延迟1周期后CPU恢复
    assert soc.cpu.finished_at == 9
    assert soc.engine.activity_snapshot()["dma"]["dma_element"] == 4


def copy(channel, src_bank, dst_bank, count=8):
    return DmaDescriptor(
        channel=channel,
        src_base=src_bank * BANK,
        dst_base=dst_bank * BANK,
        inner_count=count,
        src_inner_stride=4,
        dst_inner_stride=4,
    )


def test_channels_on_disjoint_banks_do_not_slow_each_other():
    config = PlatformConfig(bank_count=4, bank_size_bytes=BANK)
    alone = Soc.build(config)
    alone.run([StartDma(descriptor=copy(0, 0, 1), wait=True)])
    solo = alone.dma.channel(0).end_cycle - alone.dma.channel(0).start_cycle
    assert solo == 16

    both = Soc.build(config)
    both.run(
        [
            StartDma(descriptor=copy(0, 0, 1)),
            StartDma(descriptor=copy(1, 2, 3), wait=True),
        ]
    )
    for channel in both.dma.channels:
        assert channel.status is ChannelStatus.DONE
        assert channel.end_cycle - channel.start_cycle == solo


def test_busy_channel_rejects_a_second_start():
    soc = fresh_soc()
    desc = DmaDescriptor(src_base=0, dst_base=BANK, inner_count=8, src_inner_stride=4, dst_inner_stride=4)
    with pytest.raises(ChannelBusy):
        soc.run([StartDma(descriptor=desc), StartDma(descriptor=desc)])


def test_powered_down_destination_aborts_the_channel():
    soc = fresh_soc()
    desc = DmaDescriptor(src_base=0, dst_base=BANK, inner_count=4, src_inner_stride=4, dst_inner_stride=4)
    soc.run(
        [
            PowerCommand(domain="bank1", state=PowerState.OFF, wait=True),
            StartDma(descriptor=desc, wait=True),
        ]
    )
    channel = soc.dma.channel(0)
    assert channel.status is ChannelStatus.ERROR
    assert not channel.active
    assert "bank1" in channel.error
    assert channel.elements_done == 0
    assert soc.cpu.finished
    assert [line.name for line in soc.cpu.handled] == ["dma0-error"]
    assert soc.irq.pending_lines() == []
