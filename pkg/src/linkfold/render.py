"""SVG rendering of motion traces.

A frame is the configuration after a given percentage of the trace's
moves, projected to 2D by an orthographic ``2 x d`` matrix (default:
identity on the first two coordinates).  Output is plain SVG polylines
with fixed-precision coordinates, so identical inputs give byte
identical files.
"""
from __future__ import annotations

import numpy as np

from .geom import GeometryError
from .model import MotionTrace


def default_projection(d):
    """Orthographic drop to the first two coordinates."""
    P = np.zeros((2, d))
    P[0, 0] = 1.0
    P[1, 1] = 1.0
    return P


def frame_configuration(trace: MotionTrace, percent):
    """Configuration after round(percent% of the moves) moves."""
    if not 0 <= percent <= 100:
        raise GeometryError("frame percentage out of range: %r" % percent)
    m = len(trace.steps)
    k = int(round(percent / 100.0 * m))
    V = trace.initial.copy()
    for step in trace.steps[:k]:
        V = step.move.apply(V, [1.0])[0]
    return V


def _edge_polylines(trace: MotionTrace):
    """Maximal vertex runs along consecutive edges (one polyline each)."""
    E = trace.edges
    runs = []
    used = np.zeros(E.shape[0], dtype=bool)
    nxt = {}
    for r, (i, j) in enumerate(E):
        nxt.setdefault(int(i), []).append((r, int(j)))
    for r0, (i0, j0) in enumerate(E):
        if used[r0]:
            continue
        run = [int(i0), int(j0)]
        used[r0] = True
        while True:
            ext = [(r, j) for r, j in nxt.get(run[-1], []) if not used[r]]
            if len(ext) != 1:
                break
            r, j = ext[0]
            used[r] = True
            run.append(j)
        runs.append(run)
    return runs


def render_frame_svg(trace: MotionTrace, percent, proj=None, scale=100.0,
                     margin=10.0):
    """One SVG document for one frame; deterministic text output."""
    V = frame_configuration(trace, percent)
    d = V.shape[1]
    P = default_projection(d) if proj is None else np.asarray(proj, float)
    if P.shape != (2, d):
        raise GeometryError("projection must be 2 x %d" % d)
    XY = (V @ P.T) * float(scale)
    XY[:, 1] = -XY[:, 1]            # SVG's y axis points down
    lo = XY.min(axis=0) - margin
    hi = XY.max(axis=0) + margin
    w, h = hi - lo
    lines = [
        '<svg xmlns="http://www.w3.org/2000/svg" '
        'viewBox="%.3f %.3f %.3f %.3f">' % (lo[0], lo[1], w, h)
    ]
    for run in _edge_polylines(trace):
        pts = " ".join("%.3f,%.3f" % (XY[i, 0], XY[i, 1]) for i in run)
        lines.append('<polyline points="%s" fill="none" stroke="black" '
                     'stroke-width="1" stroke-linecap="round"/>' % pts)
    for i in range(V.shape[0]):
        lines.append('<circle cx="%.3f" cy="%.3f" r="1.6" fill="black"/>'
                     % (XY[i, 0], XY[i, 1]))
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


DEFAULT_FRAMES = (0, 25, 50, 75, 100)


def render_trace(trace: MotionTrace, out_prefix, frames=DEFAULT_FRAMES,
                 proj=None, scale=100.0):
    """Write one SVG per requested frame percentage; returns the paths."""
    paths = []
    for pct in frames:
        svg = render_frame_svg(trace, pct, proj=proj, scale=scale)
        path = "%s_%03d.svg" % (out_prefix, int(round(pct)))
        with open(path, "w") as fh:
            fh.write(svg)
        paths.append(path)
    return paths
