"""Hot dynamic-programming kernels.

Two interchangeable backends implement the same functions:

* ``numba``: scalar loops compiled with ``numba.njit`` (default when numba
  imports).
* ``numpy``: vectorized pure-numpy sweeps.

Set ``TRANSLITKIT_DISABLE_NUMBA=1`` to force the numpy backend.  Both
backends stay importable through :func:`get_backend` so they can be
benchmarked and cross-checked against each other.
"""

import os
from types import ModuleType

from . import _numpy

SUB, DEL, INS = 0, 1, 2
ENV_FLAG = "TRANSLITKIT_DISABLE_NUMBA"

try:
    from . import _numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    _numba = None

_BACKENDS = {"numpy": _numpy}
if _numba is not None:
    _BACKENDS["numba"] = _numba


def _flag_set() -> bool:
    return os.environ.get(ENV_FLAG, "").strip().lower() in {"1", "true", "yes", "on"}


def get_backend(name: str | None = None) -> ModuleType:
    if name is None:
        name = "numpy" if (_flag_set() or _numba is None) else "numba"
    try:
        return _BACKENDS[name]
    except KeyError:
        raise ValueError(f"unknown or unavailable kernel backend {name!r}") from None


def available_backends() -> list[str]:
    return sorted(_BACKENDS)


backend = get_backend()
BACKEND_NAME = "numba" if backend is _numba else "numpy"

edit_ops = backend.edit_ops
lattice_forward = backend.lattice_forward
lattice_backward = backend.lattice_backward
estep_batch = backend.estep_batch
viterbi_lattice = backend.viterbi_lattice
