"""Select the quadrature backend: compiled extension if built, else pure python.

Set ``BIDCLUBS_NO_EXTENSION=1`` to force the pure backend.
"""

import os

if os.environ.get("BIDCLUBS_NO_EXTENSION") == "1":
    from bidclubs import _bidkernel_py as impl
else:
    try:
        from bidclubs import _bidkernel as impl  # type: ignore[no-redef]
    except ImportError:
        from bidclubs import _bidkernel_py as impl  # type: ignore[no-redef]

BACKEND = impl.BACKEND
UNIFORM = impl.UNIFORM
POWER = impl.POWER
CUSTOM = impl.CUSTOM

cdf_one = impl.cdf_one
cdf_many = impl.cdf_many
shading_scalar = impl.shading_scalar
shading_many = impl.shading_many
prefix_table = impl.prefix_table
integral_from_table = impl.integral_from_table


def kernel_backend():
    """Name of the active numerical backend ("compiled" or "pure")."""
    return BACKEND
