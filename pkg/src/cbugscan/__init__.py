"""Static analysis framework for a C subset.

The package is organised as a pipeline: the frontend turns source text
into an AST, the ir layer derives control flow graphs and call graphs
and manages translation units, and checkers walk those structures to
produce error traces.  The cli module ties it together behind the
``cbugscan`` command.
"""

from cbugscan.errors import (
    CbugscanError,
    ConfigError,
    FrontendError,
    PatternError,
)

__version__ = "0.1.0"

__all__ = [
    "CbugscanError",
    "ConfigError",
    "FrontendError",
    "PatternError",
    "__version__",
]
