"""Ergodic secrecy rates of uplink RIS-aided multi-user MISO systems with RIS phase errors."""

from .errors import ConfigurationError, DomainError, ParseError, RisSecError, ValidationError
from .instantaneous import Active, EnergyHarvesting, Passive, PhasePlan, make_plan
from .scenario import Scenario, default_scenario, parse_scenario, scenario_from_dict

__version__ = "0.1.0"

__all__ = [
    "Active", "ConfigurationError", "DomainError", "EnergyHarvesting", "ParseError", "Passive", "PhasePlan",
    "RisSecError", "Scenario", "ValidationError", "make_plan", "default_scenario", "parse_scenario",
    "scenario_from_dict",
]
