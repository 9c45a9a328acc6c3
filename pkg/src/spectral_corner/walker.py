"""Brownian-bridge Monte Carlo estimator of Dirichlet heat traces.

The diagonal heat kernel of a planar domain D factors as

  H_D(t; p, p) = (1/4pi t) * P[standard bridge of lifetime t from p to p
                               stays inside D],

for the positive Laplacian (generator -Delta, coordinate variance 2t over
the lifetime).  Integrating p uniformly over D gives

  Tr(e^{-t Delta}) = (Area/4pi t) * E[survival],

which this module estimates by exact conditional-Gaussian midpoint
refinement of the bridge, a per-segment boundary-crossing correction
exp(-d1 d2 / ds) for excursions between knots, and explicit
segment-intersection kills against slit polylines (either side of a slit is
absorbing).  The random stream is counter-based and keyed by (seed, batch),
so results are bit-identical regardless of batching or threading.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import SpecError
from .geometry import ArcPiece, Domain, Segment

_BATCH = 32768


@dataclass(frozen=True)
class BridgeEstimate:
    """Monte Carlo heat-trace estimate with its sampling error."""

    t: float
    n: int
    steps: int
    estimate: float
    stderr: float
    survival: float
    seed: int

    def __post_init__(self):
        if self.estimate < 0:
            raise SpecError("trace estimate must be nonnegative")


def _next_pow2(k: int) -> int:
    return 1 << (k - 1).bit_length()


def _slit_clearance(domain: Domain) -> float:
    lengths = [float(np.hypot(*(sl[j + 1] - sl[j])))
               for sl in domain.slits for j in range(len(sl) - 1)]
    return min(lengths) if lengths else math.inf


def _boundary_geometry(domain: Domain):
    """Deduplicated straight walls (p0, p1) and arcs (center, R) for distance."""
    segs = []
    arcs = []
    seen = set()
    for piece in domain.pieces:
        if isinstance(piece, Segment):
            key = (round(piece.p0[0], 12), round(piece.p0[1], 12),
                   round(piece.p1[0], 12), round(piece.p1[1], 12))
            rkey = key[2:] + key[:2]
            if key in seen or rkey in seen:
                continue  # the two prime-end sides of a slit share geometry
            seen.add(key)
            segs.append((piece.p0.copy(), piece.p1.copy()))
        elif isinstance(piece, ArcPiece):
            arcs.append((piece.center.copy(), piece.radius))
    return segs, arcs


def _dist_to_boundary(pts: np.ndarray, segs, arcs) -> np.ndarray:
    """Unsigned distance from each point to the nearest boundary piece."""
    d = np.full(pts.shape[0], np.inf)
    for p0, p1 in segs:
        ab = p1 - p0
        L2 = float(ab @ ab)
        s = np.clip(((pts - p0) @ ab) / L2, 0.0, 1.0)
        proj = p0 + s[:, None] * ab
        d = np.minimum(d, np.hypot(pts[:, 0] - proj[:, 0], pts[:, 1] - proj[:, 1]))
    for center, radius in arcs:
        r = np.hypot(pts[:, 0] - center[0], pts[:, 1] - center[1])
        d = np.minimum(d, np.abs(radius - r))
    return d


def _segments_cross_many(a0, a1, b0, b1) -> np.ndarray:
    """Vectorized proper-crossing test of segments [a0,a1] vs one [b0,b1]."""
    def orient(p, q, r):
        return (q[..., 0] - p[..., 0]) * (r[..., 1] - p[..., 1]) \
            - (q[..., 1] - p[..., 1]) * (r[..., 0] - p[..., 0])

    b0 = np.broadcast_to(b0, a0.shape)
    b1 = np.broadcast_to(b1, a0.shape)
    d1 = orient(b0, b1, a0)
    d2 = orient(b0, b1, a1)
    d3 = orient(a0, a1, b0)
    d4 = orient(a0, a1, b1)
    return ((d1 > 0) != (d2 > 0)) & ((d3 > 0) != (d4 > 0))


def _sample_interior(domain: Domain, rng, m: int) -> np.ndarray:
    """m uniform interior points (direct for rectangles, else rejection)."""
    if domain.kind == "rectangle":
        a, b = domain.params["a"], domain.params["b"]
        return rng.random((m, 2)) * [a, b]
    if domain.kind == "disk":
        lo = np.array([-domain.params["R"], -domain.params["R"]])
        span = 2 * domain.params["R"]
    elif domain.vertices is not None:
        lo = domain.vertices.min(axis=0)
        span = domain.vertices.max(axis=0) - lo
    elif domain.kind == "sector":
        radius, alpha = domain.params["R"], domain.params["alpha"]
        if alpha > 2:
            raise SpecError("Monte Carlo unsupported on cone sectors (alpha > 2)")
        lo = np.array([-radius, -radius])
        span = 2 * radius
    else:
        raise SpecError(f"Monte Carlo unsupported for kind {domain.kind!r}")
    out = np.empty((m, 2))
    got = 0
    while got < m:
        cand = lo + rng.random((2 * (m - got) + 16, 2)) * span
        keep = cand[domain.contains(cand)]
        take = min(m - got, keep.shape[0])
        out[got:got + take] = keep[:take]
        got += take
    return out


def _bridge_offsets(rng, m: int, steps: int, t: float) -> np.ndarray:
    """Midpoint-refined bridge offsets, shape (m, steps+1, 2), zero endpoints.

    Conditional on the two bracketing knots a duration tau apart, the
    midpoint is Gaussian around their mean with per-coordinate variance
    tau/2 (variance rate 2 for the -Delta generator).
    """
    z = np.zeros((m, steps + 1, 2))
    stride = steps
    while stride > 1:
        half = stride // 2
        idx = np.arange(0, steps, stride)
        tau = t * stride / steps
        mean = 0.5 * (z[:, idx] + z[:, idx + stride])
        z[:, idx + half] = mean + rng.standard_normal(mean.shape) * math.sqrt(tau / 2)
        stride = half
    return z


def bridge_trace_estimate(domain: Domain, t: float, n: int, steps: int = 64,
                          seed: int = 0) -> BridgeEstimate:
    """Estimate Tr(e^{-t Delta}) from n bridges of `steps` segments each.

    steps is rounded up to a power of two for midpoint refinement.  Between
    consecutive knots the path survives an excursion toward the nearest
    wall with probability 1 - exp(-d1 d2/ds) (ds the knot spacing in time);
    crossing a slit polyline kills the path outright.
    """
    if t <= 0:
        raise SpecError("bridge_trace_estimate requires t > 0")
    if n < 1 or steps < 2:
        raise SpecError("bridge_trace_estimate requires n >= 1, steps >= 2")
    steps = _next_pow2(steps)
    ds = t / steps
    clearance = _slit_clearance(domain)
    if 2.0 * math.sqrt(ds) > clearance:
        raise SpecError(
            f"steps too coarse: rms step {2 * math.sqrt(ds):.3g} exceeds slit "
            f"clearance {clearance:.3g}; increase steps")
    segs, arcs = _boundary_geometry(domain)
    slit_segs = [(sl[j], sl[j + 1])
                 for sl in domain.slits for j in range(len(sl) - 1)]

    total = 0.0
    total_sq = 0.0
    done = 0
    batch_index = 0
    while done < n:
        m = min(_BATCH, n - done)
        rng = np.random.Generator(np.random.Philox(
            key=np.array([seed, batch_index], dtype=np.uint64)))
        starts = _sample_interior(domain, rng, m)
        paths = starts[:, None, :] + _bridge_offsets(rng, m, steps, t)
        flat = paths.reshape(-1, 2)
        inside = domain.contains(flat).reshape(m, steps + 1)
        alive = inside.all(axis=1)

        dist = _dist_to_boundary(flat, segs, arcs).reshape(m, steps + 1)
        # survival of the unsampled excursion on every inter-knot segment
        log_keep = np.log1p(-np.exp(-dist[:, :-1] * dist[:, 1:] / ds)
                            .clip(max=1.0 - 1e-16)).sum(axis=1)
        weight = np.where(alive, np.exp(log_keep), 0.0)

        for b0, b1 in slit_segs:
            crossed = _segments_cross_many(
                paths[:, :-1], paths[:, 1:],
                np.asarray(b0, dtype=float), np.asarray(b1, dtype=float))
            weight[crossed.any(axis=1)] = 0.0

        total += float(weight.sum())
        total_sq += float((weight ** 2).sum())
        done += m
        batch_index += 1

    mean = total / n
    var = max(total_sq / n - mean ** 2, 0.0)
    scale = domain.area / (4 * math.pi * t)
    return BridgeEstimate(
        t=t, n=n, steps=steps,
        estimate=scale * mean,
        stderr=scale * math.sqrt(var / n),
        survival=mean, seed=seed,
    )
