"""Numerical tolerances shared across the package.

``EPS`` is the general predicate tolerance (membership, tangency,
intersection decisions); ``EPS_UNIT`` is the stricter tolerance used for
orthonormality of frames.  Both may be overridden at runtime (the CLI
exposes ``--eps``); functions read them at call time.
"""

EPS = 1e-9
EPS_UNIT = 1e-12

# Angular tolerance used when comparing positions on circles and spheres.
ANG_EPS = 1e-9
