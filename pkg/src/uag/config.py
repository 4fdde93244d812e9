import os

DEFAULT_POINT_BUDGET = 64
# Upper bound on elements of any generated subalgebra.
DEFAULT_ELEMENT_BUDGET = 2_000_000


def point_budget(override=None):
    if override is not None:
        return int(override)
    return int(os.environ.get("UAG_POINT_BUDGET", DEFAULT_POINT_BUDGET))


def element_budget(override=None):
    if override is not None:
        return int(override)
    return int(os.environ.get("UAG_ELEMENT_BUDGET", DEFAULT_ELEMENT_BUDGET))


def use_numba():
    """Numba kernels are used unless ``UAG_NUMBA=0`` or numba is missing."""
    if os.environ.get("UAG_NUMBA", "1").strip().lower() in ("0", "false", "no", "off"):
        return False
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True
