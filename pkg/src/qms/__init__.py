"""Simulation toolkit for atom-array quantum metasurfaces."""
__version__ = "0.1.0"

from .errors import (ConvergenceFailure, InvalidArgument, NumericalFailure, ProtocolError,
                     QmsError, SingularityError)

__all__ = ["__version__", "QmsError", "InvalidArgument", "NumericalFailure",
           "SingularityError", "ConvergenceFailure", "ProtocolError"]
