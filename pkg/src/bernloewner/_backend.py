"""Select the compiled core when importable, else the pure-Python kernels.

Set ``BERNLOEWNER_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _pycore

if os.environ.get("BERNLOEWNER_PURE_PYTHON") == "1":
    core = _pycore
else:
    try:
        from . import _core as core
    except ImportError:  # extension not built
        core = _pycore

BACKEND = "compiled" if core is not _pycore else "python"

kernel_sum = core.kernel_sum
flow_atoms = core.flow_atoms
generator_atoms = core.generator_atoms
