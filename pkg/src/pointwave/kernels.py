"""Backend selection for the hot loops.

The compiled extension is used when importable; set POINTWAVE_PURE_PYTHON=1
to force the numpy fallback. ``BACKEND`` names the active one.
"""
import os

from . import _kernels_py

if os.environ.get("POINTWAVE_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl
    except ImportError:
        _impl = _kernels_py

BACKEND = "python" if _impl is _kernels_py else "compiled"

NEAREST_NODE = 0
CHARACTERISTICS_EXACT = 1

rk4_first_model = _impl.rk4_first_model
rk4_standard_model = _impl.rk4_standard_model
pde_advance = _impl.pde_advance
product_integral = _impl.product_integral
volterra2_solve = _impl.volterra2_solve
nonlocal_march = _impl.nonlocal_march
history_sum = _impl.history_sum
