"""Built-in checkers and the registry wiring them to the CLI."""

from cbugscan.checkers.automaton import AutomatonChecker
from cbugscan.checkers.base import (
    Checker,
    CheckerDescriptor,
    CheckerRegistry,
    Services,
)
from cbugscan.checkers.lockstat import LockstatChecker
from cbugscan.checkers.reach import ReachChecker
from cbugscan.checkers.threads import ThreadChecker

__all__ = [
    "AutomatonChecker",
    "Checker",
    "CheckerDescriptor",
    "CheckerRegistry",
    "LockstatChecker",
    "ReachChecker",
    "Services",
    "ThreadChecker",
    "builtin_registry",
]


def builtin_registry() -> CheckerRegistry:
    registry = CheckerRegistry()
    registry.register(CheckerDescriptor(
        "automaton", AutomatonChecker, default_config="locks.aut"))
    registry.register(CheckerDescriptor(
        "lockstat", LockstatChecker, default_config="lockstat.conf"))
    registry.register(CheckerDescriptor(
        "thread", ThreadChecker, default_config="thread.conf"))
    registry.register(CheckerDescriptor("reach", ReachChecker))
    return registry
