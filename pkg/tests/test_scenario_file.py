import pytest

from coillink.errors import ScenarioParseError, UnknownKeyError, ValidationError
from coillink.link_model import designed_capacitance
from coillink.lsk_analysis import MismatchSpec, SweepScale, SweepSpec
from coillink.presets import get_preset
from coillink.scenario_file import ScenarioConfig, parse_scenario, serialize_scenario
from coillink.transient import TransientConfig

SAMPLE = """
# parasitic case with a detuned primary
preset = flat
c_p = 12p

[primary_tank]
c_s1 = 17.03p          # below the designed 17.10 pF
drive_frequency = 40.68MHz

[link]
coupling = 0.06

[transient]
sw_pattern = 1010
bit_period = 10u
"""


def test_empty_text_gives_flat_preset():
    config = parse_scenario("")
    assert config.scenario == get_preset("flat")
    assert config.preset == "flat"
    assert config.scenario.coupling == 0.05
    assert config.scenario.primary_tank.drive_frequency == 40.68e6
    assert config.mismatch == MismatchSpec()
    assert config.sweep == SweepSpec()
    assert config.transient == TransientConfig()


def test_none_gives_flat_preset():
    assert parse_scenario(None) == parse_scenario("")


def test_bended_preset():
    scenario = parse_scenario("preset = bended").scenario
    assert scenario.secondary_coil.inductance == 562e-9
    assert scenario.coupling == 0.042


def test_sample_file():
    config = parse_scenario(SAMPLE)
    scenario = config.scenario
    assert scenario.secondary_tank.c_p == pytest.approx(12e-12)
    assert scenario.primary_tank.c_s1 == pytest.approx(17.03e-12)
    assert scenario.coupling == 0.06
    assert config.transient.sw_pattern == (1, 0, 1, 0)
    assert config.transient.bit_period == pytest.approx(10e-6)


def test_top_level_key_goes_to_owning_section():
    assert parse_scenario("c_p = 12p").scenario.secondary_tank.c_p == pytest.approx(12e-12)
    assert parse_scenario("k_min = 0.02").sweep.k_min == 0.02


def test_tank_capacitors_follow_overridden_inductance():
    scenario = parse_scenario("[secondary_coil]\ninductance = 1u\n").scenario
    assert scenario.secondary_tank.c_s2 == pytest.approx(designed_capacitance(1e-6, 40.68e6))


def test_coupling_out_of_range_names_key_and_line():
    with pytest.raises(ValidationError) as info:
        parse_scenario("# header\ncoupling = 1.5\n")
    assert "coupling" in str(info.value)
    assert info.value.line == 2


def test_sweep_bounds_name_line():
    with pytest.raises(ScenarioParseError) as info:
        parse_scenario("[sweep]\nk_min = 0.3\nk_max = 0.2\n")
    assert info.value.line == 2
    assert "k_min" in str(info.value)


def test_unknown_key():
    with pytest.raises(UnknownKeyError) as info:
        parse_scenario("[link]\ncoupling = 0.05\nmutual = 1n\n")
    assert info.value.line == 3
    assert "mutual" in str(info.value)


def test_unknown_top_level_key():
    with pytest.raises(UnknownKeyError, match="colour"):
        parse_scenario("colour = blue")


def test_ambiguous_key_must_be_in_a_section():
    with pytest.raises(UnknownKeyError, match="ambiguous"):
        parse_scenario("inductance = 1u")


def test_unknown_section():
    with pytest.raises(UnknownKeyError, match="section"):
        parse_scenario("[rectifier]\n")


@pytest.mark.parametrize("text, line", [
    ("[link]\ncoupling 0.05\n", 2),
    ("\n[link\n", 2),
    ("[link]\ncoupling = 0.05\ncoupling = 0.06\n", 3),
    ("c_p = twelve", 1),
    ("[sweep]\npoints = 2.5\n", 2),
    ("[sweep]\nscale = cubic\n", 2),
    ("preset = curved", 1),
])
def test_malformed_lines(text, line):
    with pytest.raises(ScenarioParseError) as info:
        parse_scenario(text)
    assert info.value.line == line
    assert f"line {line}" in str(info.value)


def test_reads_files(tmp_path):
    path = tmp_path / "case.scn"
    path.write_text(SAMPLE, encoding="utf-8")
    assert parse_scenario(path) == parse_scenario(SAMPLE)
    assert parse_scenario(str(path)) == parse_scenario(SAMPLE)


def test_missing_file_is_reported(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    for source in ("missing_case.scn", str(tmp_path / "missing_case.scn"),
                   tmp_path / "missing_case.scn"):
        with pytest.raises(ScenarioParseError, match="cannot read scenario file") as info:
            parse_scenario(source)
        assert info.value.line is None


@pytest.mark.parametrize("text", [
    "",
    "preset = bended",
    SAMPLE,
    "[mismatch]\nc_p_override = 12p\nc_s1_relative_error = 0.01\n",
    "[sweep]\nk_min = 0.001\nk_max = 0.3\npoints = 77\nscale = log\n",
    "[transient]\ntime_step = 100p\nduration = 100u\nsettle_time = 30u\nsample_fraction = 0.25\n",
])
def test_serialize_round_trip(text):
    config = parse_scenario(text)
    assert parse_scenario(serialize_scenario(config)) == config


def test_round_trip_of_built_config(parasitic):
    config = ScenarioConfig(
        scenario=parasitic.with_coupling(0.0731).with_c_s1(17.0123e-12),
        mismatch=MismatchSpec(c_s1_relative_error=-0.013),
        sweep=SweepSpec(0.02, 0.25, 33, SweepScale.LOG),
        transient=TransientConfig(bit_period=7e-6, sw_pattern=(0, 1, 1), settle_time=12e-6),
    )
    assert parse_scenario(serialize_scenario(config)) == config
