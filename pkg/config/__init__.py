"""平台配置与地址映射模块"""

from .address_map import AddressMap, Region, RegionKind, build_address_map
from .platform_config import (
    AcceleratorEntry,
    BusTopology,
    CoreType,
    Peripheral,
    PlatformConfig,
    ValidationReport,
    validate,
)

__all__ = [
    "AcceleratorEntry",
    "AddressMap",
    "BusTopology",
    "CoreType",
    "Peripheral",
    "PlatformConfig",
    "Region",
    "RegionKind",
    "ValidationReport",
    "build_address_map",
    "validate",
]
