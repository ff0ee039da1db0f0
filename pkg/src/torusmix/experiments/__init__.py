"""Config-driven scenario runner."""

from .config import ConfigError
from .report import emit_report
from .runner import run_scenario
from .scenarios import list_scenarios

__all__ = ["ConfigError", "emit_report", "run_scenario", "list_scenarios"]
