"""共享测试夹具"""

from pathlib import Path

import pytest

from config.platform_config import AcceleratorEntry, BusTopology, PlatformConfig
from hw.soc import Soc
from parsers.config_parser import ConfigParser

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def default_config() -> PlatformConfig:
    return ConfigParser.parse_file(FIXTURES / "default.json")


@pytest.fixture
def carus_config() -> PlatformConfig:
    return ConfigParser.parse_file(FIXTURES / "xheep-carus.json")


def accel_config(**overrides) -> PlatformConfig:
    """一个插槽、nm-vector 接在 bank1 上的小平台"""
    fields = dict(
        bank_count=2,
        bank_size_bytes=4096,
        accelerator_slots=1,
        accelerators=(AcceleratorEntry(slot=0, params={"bank_index": 1, "cycles_per_element": 1}),),
    )
    fields.update(overrides)
    return PlatformConfig(**fields)


@pytest.fixture
def small_soc() -> Soc:
    return Soc.build(accel_config())


@pytest.fixture
def one_at_a_time_soc() -> Soc:
    return Soc.build(accel_config(bus_topology=BusTopology.ONE_AT_A_TIME))
