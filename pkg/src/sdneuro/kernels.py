"""Kernel backend selection.

Imports the compiled extension when present, otherwise the pure-Python
fallback.  ``BACKEND`` reports which one is active; both expose the same
functions and produce identical results.
"""

try:
    from . import _kernels as impl

    BACKEND = "cython"
except ImportError:  # extension not built
    from . import _kernels_py as impl

    BACKEND = "python"

lpf_run = impl.lpf_run
sd_run = impl.sd_run
adex_run = impl.adex_run
render_pulses = impl.render_pulses
sd_run_const_nodes = impl.sd_run_const_nodes

__all__ = [
    "BACKEND",
    "impl",
    "lpf_run",
    "sd_run",
    "adex_run",
    "render_pulses",
    "sd_run_const_nodes",
]
