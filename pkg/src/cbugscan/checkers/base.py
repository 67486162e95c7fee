"""Checker plugin interface and registry.

A checker examines one translation unit at a time and returns error
traces. Checkers hold no cross-unit mutable state, which is what lets
the engine stream units through a bounded cache without changing any
checker's output.
"""

from __future__ import annotations

import importlib.resources
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Callable

from cbugscan.errors import ConfigError
from cbugscan.ir.units import TranslationUnit, UnitManager
from cbugscan.report import ErrorTrace


@dataclass(eq=False)
class Services:
    """What the engine offers a running checker."""
    unit_manager: UnitManager
    report_diagnostic: Callable[[str], None] = lambda _message: None
    points_to: Callable[[TranslationUnit], dict[str, frozenset[str]]] = \
        field(default=lambda _unit: {})


class Checker(ABC):
    """Base class for analyses; subclasses set `name`."""

    name = "checker"

    @abstractmethod
    def check_unit(self, unit: TranslationUnit,
                   services: Services) -> list[ErrorTrace]:
        """Analyze one unit; return its findings."""


@dataclass(frozen=True)
class CheckerDescriptor:
    name: str
    factory: Callable[[str | None], Checker]
    default_config: str | None = None  # bundled resource name, if any


class CheckerRegistry:
    def __init__(self) -> None:
        self._entries: dict[str, CheckerDescriptor] = {}

    def register(self, descriptor: CheckerDescriptor) -> None:
        if descriptor.name in self._entries:
            raise ConfigError(
                f"checker {descriptor.name!r} registered twice")
        self._entries[descriptor.name] = descriptor

    def names(self) -> list[str]:
        return sorted(self._entries)

    def create(self, name: str, config_path: str | None = None) -> Checker:
        descriptor = self._entries.get(name)
        if descriptor is None:
            known = ", ".join(self.names())
            raise ConfigError(f"unknown checker {name!r} (known: {known})")
        if config_path is None and descriptor.default_config is not None:
            resource = importlib.resources.files("cbugscan.configs")
            config_path = str(resource / descriptor.default_config)
        return descriptor.factory(config_path)
