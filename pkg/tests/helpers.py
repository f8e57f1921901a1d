from functools import lru_cache

from fraclod.geometry import build_localized_network, constants_for
from fraclod.problem import Problem


@lru_cache(maxsize=None)
def localized_problem(k_max: int = 3) -> Problem:
    """Cached localized problem for hypothesis tests (fixtures do not mix with @given)."""
    net = build_localized_network(k_max)
    return Problem(net, constants_for(net, 1.0))
