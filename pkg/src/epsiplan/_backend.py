"""Backend selection for the Monte Carlo kernels.

Numba is optional. Setting ``EPSIPLAN_DISABLE_NUMBA=1`` (or any of
``true``/``yes``/``on``) forces the pure-numpy path even when numba imports.
The flag is read on every dispatch so tests can flip it with monkeypatch.
"""
from __future__ import annotations

import os

try:
    import numba  # noqa: F401

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is installed in CI
    HAS_NUMBA = False

DISABLE_ENV = "EPSIPLAN_DISABLE_NUMBA"
BACKENDS = ("numba", "numpy")


def numba_disabled_by_env() -> bool:
    return os.environ.get(DISABLE_ENV, "").strip().lower() in {"1", "true", "yes", "on"}


def resolve_backend(backend: str | None = None) -> str:
    """Return the backend name to use for a kernel call.

    An explicit ``backend`` wins over the environment; asking for numba when
    it is not importable is an error rather than a silent downgrade.
    """
    if backend is None:
        return "numba" if HAS_NUMBA and not numba_disabled_by_env() else "numpy"
    if backend not in BACKENDS:
        raise ValueError(f"unknown backend {backend!r}; expected one of {BACKENDS}")
    if backend == "numba" and not HAS_NUMBA:
        raise RuntimeError("numba backend requested but numba is not installed")
    return backend
