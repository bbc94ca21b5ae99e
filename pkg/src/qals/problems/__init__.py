"""Problem translators: number partitioning and the traveling salesman."""

from . import npp, tsp

__all__ = ["npp", "tsp"]
