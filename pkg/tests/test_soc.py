"""平台组装：总线主设备与定时器寄存器"""

from config.platform_config import PlatformConfig
from hw.cpu import Compute, WaitForInterrupt, Write
from hw.soc import Soc


def timer_base(soc):
    return soc.address_map.region("timer").base


def test_instruction_fetch_is_not_a_bus_master():
    soc = Soc.build(PlatformConfig())
    assert "cpu-instr" not in soc.bus.masters
    assert soc.bus.masters[0] == "cpu-data"
    summary = soc.run([Compute(cycles=5)])
    # 取指只计入能耗计数，不占用仲裁
    assert soc.bus.conservation()["issued"] == 0
    assert summary.activity["bus"]["bus_grant"] == 5
    assert summary.activity["bank0"]["mem_access"] == 5


def test_arming_timer_with_zero_load_is_a_slave_error():
    soc = Soc.build(PlatformConfig())
    soc.run([Write(address=timer_base(soc) + 4, value=1)])
    (access,) = soc.cpu.log
    assert access["status"] == "slave-error"
    assert soc.cpu.finished
    assert soc.timer.fired == 0
    assert soc.timer.registers[4] == 0


def test_timer_armed_over_the_bus_interrupts_the_cpu():
    soc = Soc.build(PlatformConfig())
    base = timer_base(soc)
    soc.run([Write(address=base, value=20), Write(address=base + 4, value=1), WaitForInterrupt()])
    assert [entry["status"] for entry in soc.cpu.log] == ["ok", "ok"]
    assert soc.timer.fired == 1
    assert [line.name for line in soc.cpu.handled] == ["timer"]
    # CTRL 写在周期2授权，20个周期后到期，中断延迟1个周期
    assert soc.cpu.finished_at == 2 + 20 + 1
