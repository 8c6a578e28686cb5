"""存储体的访问与电源状态"""

import pytest

from config.platform_config import TimingConfig
from hw.memory import AccessKind, BankMode, MemoryBank, PowerState, leakage_fraction, transition_latency
from sim.errors import ContractViolation, IllegalTransition, SlaveError

PATTERN = bytes(range(256))


def settle(bank, target, now):
    pending = bank.set_power_state(target, now)
    assert bank.finish_transition(pending) or pending.complete_at == now
    return pending


def test_read_and_write_are_little_endian():
    bank = MemoryBank(0, 256)
    bank.access(8, AccessKind.WRITE, 4, 0x11223344)
    assert bank.contents[8:12] == b"\x44\x33\x22\x11"
    assert bank.access(8, AccessKind.READ, 2) == 0x3344
    bank.access(9, AccessKind.WRITE, 1, 0x1FF)
    assert bank.read_word(8) == 0x1122FF44


def test_retentive_round_trip_keeps_contents():
    bank = MemoryBank(0, 256)
    bank.load(0, PATTERN)
    pending = settle(bank, PowerState.RETENTIVE, 0)
    assert pending.complete_at == 1
    with pytest.raises(SlaveError):
        bank.access(0, AccessKind.READ, 4)
    pending = settle(bank, PowerState.ON, 5)
    assert pending.complete_at == 7
    assert bank.dump() == PATTERN


def test_leaving_off_zero_fills():
    bank = MemoryBank(0, 256)
    bank.load(0, PATTERN)
    settle(bank, PowerState.OFF, 0)
    pending = settle(bank, PowerState.ON, 3)
    assert pending.complete_at == 13
    assert bank.dump() == bytes(256)


def test_entering_off_discards_contents():
    bank = MemoryBank(0, 256)
    bank.load(0, PATTERN)
    pending = bank.set_power_state(PowerState.OFF, 0)
    assert bank.dump() == PATTERN
    bank.finish_transition(pending)
    assert bank.dump() == bytes(256)


def test_clock_gating_keeps_contents():
    bank = MemoryBank(0, 256)
    bank.load(0, PATTERN)
    settle(bank, PowerState.CLOCK_GATED, 0)
    settle(bank, PowerState.ON, 1)
    assert bank.dump() == PATTERN


def test_newer_request_supersedes_pending_one():
    bank = MemoryBank(0, 256)
    stale = bank.set_power_state(PowerState.OFF, 0)
    bank.set_power_state(PowerState.ON, 0)
    assert not bank.finish_transition(stale)
    assert bank.power_state is PowerState.ON


def test_state_applies_only_when_transition_completes():
    bank = MemoryBank(0, 256)
    pending = bank.set_power_state(PowerState.OFF, 0)
    assert bank.power_state is PowerState.ON
    bank.finish_transition(pending)
    assert bank.power_state is PowerState.OFF


def test_non_gateable_bank_stays_on():
    bank = MemoryBank(0, 256, gateable=False)
    with pytest.raises(IllegalTransition):
        bank.set_power_state(PowerState.RETENTIVE, 0)
    settle(bank, PowerState.ON, 0)


def test_compute_mode_blocks_bus_but_not_backdoor():
    bank = MemoryBank(0, 256)
    bank.mode = BankMode.COMPUTE
    with pytest.raises(SlaveError):
        bank.access(0, AccessKind.WRITE, 4, 1)
    bank.write_word(0, 7)
    assert bank.read_word(0) == 7


def test_out_of_range_access_is_a_contract_violation():
    bank = MemoryBank(0, 256)
    with pytest.raises(ContractViolation):
        bank.access(254, AccessKind.READ, 4)


def test_transition_latencies_follow_timing():
    timing = TimingConfig(power_up_latency=12)
    assert transition_latency(PowerState.ON, PowerState.ON, timing) == 0
    assert transition_latency(PowerState.ON, PowerState.OFF, timing) == 1
    assert transition_latency(PowerState.CLOCK_GATED, PowerState.ON, timing) == 1
    assert transition_latency(PowerState.RETENTIVE, PowerState.ON, timing) == 2
    assert transition_latency(PowerState.OFF, PowerState.ON, timing) == 12


def test_leakage_fraction_per_state():
    assert leakage_fraction(PowerState.ON, 0.25) == 1.0
    assert leakage_fraction(PowerState.CLOCK_GATED, 0.25) == 1.0
    assert leakage_fraction(PowerState.RETENTIVE, 0.25) == 0.25
    assert leakage_fraction(PowerState.OFF, 0.25) == 0.0
