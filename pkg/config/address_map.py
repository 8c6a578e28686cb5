#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
地址映射

存储体从 0x0000_0000 起按序号连续排列；外设区位于 0x2000_0000（每个外设4 KiB，按枚举顺序）；
常开外设区位于 0x2010_0000；加速器窗口位于 0x3000_0000（每个插槽64 KiB）。
"""

from bisect import bisect_right
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Tuple

from config.platform_config import (
    ACCEL_REGION_BASE,
    ACCEL_WINDOW,
    AO_REGION_BASE,
    AO_WINDOW,
    BANK_REGION_BASE,
    PERIPHERAL_REGION_BASE,
    PERIPHERAL_WINDOW,
    PlatformConfig,
)


class RegionKind(str, Enum):
    MEMORY_BANK = "MemoryBank"
    PERIPHERAL = "Peripheral"
    AO_PERIPHERAL = "AoPeripheral"
    ACCELERATOR_WINDOW = "AcceleratorWindow"


@dataclass(frozen=True)
class Region:
    name: str
    base: int
    size_bytes: int
    kind: RegionKind
    index: int = 0

    @property
    def end(self) -> int:
        """最后一个字节的地址"""
        return self.base + self.size_bytes - 1

    def contains(self, address: int) -> bool:
        return self.base <= address <= self.end


@dataclass(frozen=True)
class AddressMap:
    """按基地址排序、互不重叠的区域列表"""

    regions: Tuple[Region, ...]

    def __post_init__(self):
        object.__setattr__(self, "_bases", [r.base for r in self.regions])

    def find(self, address: int):
        """返回包含 address 的区域，没有则返回 None"""
        i = bisect_right(self._bases, address) - 1
        if i >= 0 and self.regions[i].contains(address):
            return self.regions[i]
        return None

    def region(self, name: str) -> Region:
        for region in self.regions:
            if region.name == name:
                return region
        raise KeyError(name)

    def of_kind(self, kind: RegionKind) -> List[Region]:
        return [r for r in self.regions if r.kind is kind]

    def to_dict(self) -> Dict:
        return {
            "regions": [
                {
                    "name": r.name,
                    "base": f"0x{r.base:08X}",
                    "end": f"0x{r.end:08X}",
                    "size_bytes": r.size_bytes,
                    "kind": r.kind.value,
                }
                for r in self.regions
            ]
        }


def build_address_map(config: PlatformConfig) -> AddressMap:
    """
    按固定布局规则生成地址映射，同一配置总是得到相同结果

    Args:
        config: 已通过 validate 的配置

    Returns:
        AddressMap: 区域数 = bank_count + |peripherals| + 1 + accelerator_slots
    """
    regions: List[Region] = []

    for i in range(config.bank_count):
        regions.append(
            Region(
                name=f"bank{i}",
                base=BANK_REGION_BASE + i * config.bank_size_bytes,
                size_bytes=config.bank_size_bytes,
                kind=RegionKind.MEMORY_BANK,
                index=i,
            )
        )

    for i, peripheral in enumerate(config.ordered_peripherals()):
        regions.append(
            Region(
                name=peripheral.value.lower(),
                base=PERIPHERAL_REGION_BASE + i * PERIPHERAL_WINDOW,
                size_bytes=PERIPHERAL_WINDOW,
                kind=RegionKind.PERIPHERAL,
                index=i,
            )
        )

    regions.append(Region("ao", AO_REGION_BASE, AO_WINDOW, RegionKind.AO_PERIPHERAL))

    for slot in range(config.accelerator_slots):
        regions.append(
            Region(
                name=f"accel{slot}",
                base=ACCEL_REGION_BASE + slot * ACCEL_WINDOW,
                size_bytes=ACCEL_WINDOW,
                kind=RegionKind.ACCELERATOR_WINDOW,
                index=slot,
            )
        )

    regions.sort(key=lambda r: r.base)
    return AddressMap(tuple(regions))
