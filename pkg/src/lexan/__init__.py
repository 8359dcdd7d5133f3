"""Computational calculus for restricted log-exp-analytic functions.

Modules: :mod:`lexan.scale` (logarithmic scales and monomials),
:mod:`lexan.prepared` (prepared forms and the analytic split),
:mod:`lexan.expr` (expression DSL), :mod:`lexan.gateaux` (G^k testing) and
:mod:`lexan.cli` (command line).
"""

from .errors import LexanError, ValidationError

__version__ = "0.1.0"

__all__ = ["LexanError", "ValidationError", "__version__"]
