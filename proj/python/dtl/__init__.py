"""Two-stage drop-the-losers design: estimators of the selected treatment
mean, exact risk/bias quadrature, and a deterministic Monte Carlo engine.

Thin Python facade over the compiled core module.
"""

try:
    from ._dtl_core import *  # noqa: F401,F403
    from ._dtl_core import __doc__ as _core_doc  # noqa: F401
except ImportError:  # core module built next to this package (dev layout)
    from _dtl_core import *  # noqa: F401,F403
