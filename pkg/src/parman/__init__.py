"""parman: Taylor parameterization of invariant manifolds of implicit difference equations.

Given an implicit difference equation Z(theta_k, ..., theta_{k+N}) = 0 with a
fixed point at the origin, the package computes a one-dimensional analytic
invariant manifold through the fixed point as a truncated Taylor series P
with linear internal dynamics z -> lambda*z, by solving

    Z(P(z), P(lambda z), ..., P(lambda^N z)) = 0

order by order.  Submodules:

- series:   truncated power-series arithmetic (incl. sin/cos recursion)
- spectrum: linearization, characteristic polynomial, root classification,
            non-resonance certificates, Chebyshev reduction
- models:   builtin equation families and their closed-form data
- solver:   the order-by-order recursion, scaling, residuals, continuation
- cli:      the `parman` command line driver (TSV output)
"""

from ._kernels import backend_name
from .series import TruncatedSeries, TrigCache

__version__ = "0.1.0"

__all__ = ["TruncatedSeries", "TrigCache", "backend_name", "__version__"]
