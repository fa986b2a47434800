"""Size ceilings for the factorial-sized constructions."""
import os

from .errors import SizeLimit

DEFAULT_MAX_N = 6
HARD_MAX_N = 7


def max_n(override: int | None = None) -> int:
    """Effective ceiling: explicit override, then ``SGL_MAX_N``, then the default of 6."""
    if override is not None:
        value = int(override)
    else:
        env = os.environ.get("SGL_MAX_N")
        value = int(env) if env else DEFAULT_MAX_N
    return min(value, HARD_MAX_N)


def check_size(n: int, override: int | None = None, what: str = "construction") -> None:
    limit = max_n(override)
    if n > limit:
        raise SizeLimit(f"{what} needs n <= {limit} (got n={n}); raise it with SGL_MAX_N or --max-n")
