from .link_model import LinkScenario, LoadState, primary_current, pte, zpri
from .lsk_analysis import MismatchSpec, detune_solve, flip_threshold, sweep_coupling
from .presets import get_preset
from .scenario_file import parse_scenario, serialize_scenario
from .study import Study, StudyStep
from .transient import TransientConfig, decode_lsk, simulate

__all__ = ['LinkScenario', 'LoadState', 'primary_current', 'pte', 'zpri',
           'MismatchSpec', 'detune_solve', 'flip_threshold', 'sweep_coupling', 'get_preset',
           'parse_scenario', 'serialize_scenario', 'Study', 'StudyStep',
           'TransientConfig', 'decode_lsk', 'simulate']
