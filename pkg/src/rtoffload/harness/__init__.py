from .config import ConfigError, ScenarioConfig, load_config, parse_config
from .sweep import CSV_HEADER, SCENARIOS, scenario_base, sweep, write_csv
from .world import RunMetrics, RunResult, World, run_scenario
