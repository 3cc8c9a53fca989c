"""Localization of configuration-dependent faults in configurable C-like programs."""

from __future__ import annotations

from .cvl import parse, parse_files, parse_program
from .model import Configuration, ConfigurationSuite, FeatureLiteral, FeatureSelection, ProgramModel
from .pipeline import Localization, Options, localize
from .spc import SuspiciousPartialConfiguration, detect_spcs

__all__ = [
    "Configuration",
    "ConfigurationSuite",
    "FeatureLiteral",
    "FeatureSelection",
    "Localization",
    "Options",
    "ProgramModel",
    "SuspiciousPartialConfiguration",
    "detect_spcs",
    "localize",
    "parse",
    "parse_files",
    "parse_program",
]
