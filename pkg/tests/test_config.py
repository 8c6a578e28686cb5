"""平台配置、校验与地址映射"""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from config.address_map import RegionKind, build_address_map
from config.platform_config import (
    AcceleratorEntry,
    BusTopology,
    CoreType,
    Peripheral,
    PlatformConfig,
    TimingConfig,
    validate,
)
from parsers.config_parser import ConfigParser
from sim.errors import FileFormatError


def test_shipped_configs_are_valid(default_config, carus_config):
    assert validate(default_config).ok
    assert validate(carus_config).ok


def test_bad_bank_size_is_reported_by_field(fixtures_dir):
    config = ConfigParser.parse_file(fixtures_dir / "bad-bank-size.json")
    report = validate(config)
    assert not report.ok
    assert "bank_size_bytes" in report.fields()
    assert any(e.message == "bank_size_bytes not a power of two" for e in report.errors)


def test_validate_collects_every_violation():
    config = PlatformConfig(bank_count=0, dma_channel_count=0, clock_hz=0, timing=TimingConfig(memory_latency=0))
    fields = validate(config).fields()
    assert {"bank_count", "dma_channel_count", "clock_hz", "timing.memory_latency"} <= set(fields)


def test_accelerator_entries_are_checked():
    config = PlatformConfig(
        accelerator_slots=1,
        accelerators=(
            AcceleratorEntry(slot=3),
            AcceleratorEntry(slot=0, model="no-such-model", params={"bank_index": 7}),
        ),
    )
    fields = validate(config).fields()
    assert "accelerators.0.slot" in fields
    assert "accelerators.1.model" in fields
    assert "accelerators.1.params.bank_index" in fields


def test_bank_gateable_length_must_match():
    report = validate(PlatformConfig(bank_count=2, bank_gateable=(True,)))
    assert report.fields() == ["bank_gateable"]


def test_xif_availability_follows_core():
    assert PlatformConfig(core_type=CoreType.CV32E40X).xif_available
    assert PlatformConfig(core_type=CoreType.CV32E40PX).xif_available
    assert not PlatformConfig(core_type=CoreType.CV32E40P).xif_available
    assert not PlatformConfig(core_type=CoreType.CV32E20).xif_available


def test_default_address_map_layout(default_config):
    amap = build_address_map(default_config)
    assert len(amap.regions) == 2 + 6 + 1
    bank1 = amap.region("bank1")
    assert (bank1.base, bank1.size_bytes) == (0x8000, 0x8000)
    assert amap.region("gpio").base == 0x2000_0000
    assert amap.region("timer").base == 0x2000_4000
    assert amap.region("ao").kind is RegionKind.AO_PERIPHERAL
    assert amap.find(0x7FFF).name == "bank0"
    assert amap.find(0x1000_0000) is None


def test_address_map_is_deterministic(carus_config):
    assert build_address_map(carus_config).to_dict() == build_address_map(carus_config).to_dict()


configs = st.builds(
    PlatformConfig,
    bank_count=st.integers(1, 16),
    bank_size_bytes=st.sampled_from([256, 1024, 4096, 32768, 65536]),
    bus_topology=st.sampled_from(list(BusTopology)),
    peripherals=st.frozensets(st.sampled_from(list(Peripheral))),
    accelerator_slots=st.integers(0, 4),
)


@settings(max_examples=200)
@given(configs)
def test_regions_are_disjoint_and_counted(config):
    assert validate(config).ok
    regions = build_address_map(config).regions
    assert len(regions) == config.bank_count + len(config.peripherals) + 1 + config.accelerator_slots
    for left, right in zip(regions, regions[1:]):
        assert left.end < right.base
    assert all(r.end < 1 << 32 for r in regions)


def test_serialize_round_trip(carus_config):
    text = ConfigParser.serialize(carus_config)
    assert ConfigParser.parse(text) == carus_config
    assert ConfigParser.serialize(ConfigParser.parse(text)) == text


def test_serialize_lists_peripherals_in_layout_order():
    config = PlatformConfig(peripherals=frozenset({Peripheral.PLIC, Peripheral.GPIO}))
    assert '"GPIO",\n    "PLIC"' in ConfigParser.serialize(config)


def test_syntax_error_reports_line():
    with pytest.raises(FileFormatError) as info:
        ConfigParser.parse('{\n  "bank_count": 2,\n  oops\n}', source="broken.json")
    assert info.value.line == 3
    assert info.value.source == "broken.json"


def test_unknown_field_is_rejected():
    with pytest.raises(FileFormatError) as info:
        ConfigParser.parse('{"bank_cnt": 2}')
    assert info.value.field == "bank_cnt"


def test_wrong_enum_value_names_the_field():
    with pytest.raises(FileFormatError) as info:
        ConfigParser.parse('{"bus_topology": "Ring"}')
    assert info.value.field == "bus_topology"
