"""Length-preserving reconfiguration of chains and trees in R^d, d >= 4."""

__all__ = [
    "cli",
    "config",
    "convexify",
    "generate",
    "geom",
    "intersect",
    "model",
    "obstruction",
    "render",
    "straighten",
    "trees",
]

__version__ = "0.1.0"
