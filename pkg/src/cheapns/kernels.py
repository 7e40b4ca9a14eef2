"""Backend selection for the direct convolution kernels.

The compiled extension is used when importable; set ``CHEAPNS_PURE=1`` to
force the numpy fallback. ``CHEAPNS_THREADS`` caps the OpenMP worker count
of the compiled path. Output never depends on the worker count.
"""
import os

if os.environ.get("CHEAPNS_PURE", "") not in ("", "0"):
    from . import _fallback as _impl
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl
        BACKEND = "compiled"
    except ImportError:  # extension not built
        from . import _fallback as _impl
        BACKEND = "python"


def thread_count():
    raw = os.environ.get("CHEAPNS_THREADS", "")
    if raw:
        return max(1, int(raw))
    return os.cpu_count() or 1


def conv1d(f, g):
    return _impl.conv1d(f, g, thread_count())


def autoconv1d(f):
    return _impl.autoconv1d(f, thread_count())


def conv2d(f, g):
    return _impl.conv2d(f, g, thread_count())
