"""Dirichlet spectra: closed forms and a slit-aware finite-difference solver.

Analytic spectra cover rectangles, disks, and circular sectors of any
opening angle alpha*pi > 0 (alpha > 2 is a cone sector).  Polygonal and slit
domains with a conformal weight exp(2 u sigma) use a 5-point finite
difference discretization and a symmetric Lanczos eigensolver.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sps
import scipy.sparse.linalg as spsla

from .errors import NumericalError, SpecError
from .fields import as_field
from .geometry import Domain, MetricSpec
from .special import bessel_zeros_upto


@dataclass
class Spectrum:
    """Ascending Dirichlet eigenvalues with a completeness guarantee.

    ``completeness`` is the largest Lambda below which no eigenvalue is
    missing from ``eigenvalues``.
    """

    eigenvalues: np.ndarray
    provenance: dict
    completeness: float
    volume: float
    boundary_length: Optional[float] = None

    def __post_init__(self):
        lam = np.asarray(self.eigenvalues, dtype=float)
        if lam.size == 0:
            raise SpecError("spectrum must contain at least one eigenvalue")
        if lam[0] <= 0 or np.any(np.diff(lam) < -1e-12 * lam[-1]):
            raise SpecError("eigenvalues must be positive and nondecreasing")
        self.eigenvalues = lam

    @property
    def count(self) -> int:
        return int(self.eigenvalues.size)

    def to_csv(self, fh) -> None:
        w = csv.writer(fh)
        w.writerow(["index", "eigenvalue", "multiplicity"])
        lam = self.eigenvalues
        i = 0
        idx = 1
        while i < lam.size:
            j = i
            while j + 1 < lam.size and abs(lam[j + 1] - lam[i]) <= 1e-10 * max(1.0, lam[i]):
                j += 1
            w.writerow([idx, repr(lam[i]), j - i + 1])
            idx += j - i + 1
            i = j + 1

    def to_json_dict(self) -> dict:
        return {
            "eigenvalues": self.eigenvalues.tolist(),
            "provenance": self.provenance,
            "completeness": self.completeness,
            "volume": self.volume,
        }


def weyl_ratio(spec: Spectrum, n: int) -> float:
    """lambda_n * Vol / (4 pi n); tends to 1 as n grows (Weyl's law)."""
    if not (1 <= n <= spec.count):
        raise SpecError(f"weyl_ratio needs 1 <= n <= {spec.count}")
    return float(spec.eigenvalues[n - 1] * spec.volume / (4 * math.pi * n))


# ---------------------------------------------------------------------------
# Closed-form spectra
# ---------------------------------------------------------------------------

def analytic_spectrum(domain: Domain, N: int) -> Spectrum:
    """Closed-form Dirichlet spectrum with at least N eigenvalues.

    rectangle a x b : pi^2 (m^2/a^2 + n^2/b^2)
    disk R          : (j_{nu,k}/R)^2, integer nu, multiplicity 2 for nu >= 1
    sector alpha, R : (j_{k/alpha, m}/R)^2 for k, m >= 1

    The returned spectrum contains *all* eigenvalues up to its completeness
    bound, which is at least lambda_N.
    """
    if N < 1:
        raise SpecError("analytic_spectrum requires N >= 1")
    if domain.kind == "rectangle":
        build = lambda lam_max: _rect_eigs(domain.params["a"], domain.params["b"], lam_max)
    elif domain.kind == "disk":
        build = lambda lam_max: _bessel_eigs(domain.params["R"], lam_max, orders=None)
    elif domain.kind == "sector":
        alpha = domain.params["alpha"]
        build = lambda lam_max: _bessel_eigs(domain.params["R"], lam_max, orders=alpha)
    else:
        raise SpecError(f"no closed-form spectrum for kind {domain.kind!r}")

    # Weyl-law guess for the cutoff, grown until N eigenvalues are present.
    lam_max = 4 * math.pi * (N + 10) / domain.area * 1.5 + 50.0 / domain.area
    for _ in range(40):
        lam = build(lam_max)
        if lam.size >= N:
            break
        lam_max *= 1.6
    else:
        raise NumericalError("analytic_spectrum", f"could not collect {N} eigenvalues")
    return Spectrum(lam, {"source": "analytic", "kind": domain.kind,
                          "params": domain.params},
                    completeness=lam_max, volume=domain.area,
                    boundary_length=domain.perimeter)


def spectrum_upto(domain: Domain, lam_max: float) -> Spectrum:
    """All closed-form eigenvalues <= lam_max (completeness = lam_max)."""
    if domain.kind == "rectangle":
        lam = _rect_eigs(domain.params["a"], domain.params["b"], lam_max)
    elif domain.kind == "disk":
        lam = _bessel_eigs(domain.params["R"], lam_max, orders=None)
    elif domain.kind == "sector":
        lam = _bessel_eigs(domain.params["R"], lam_max, orders=domain.params["alpha"])
    else:
        raise SpecError(f"no closed-form spectrum for kind {domain.kind!r}")
    if lam.size == 0:
        raise SpecError("lam_max below the first eigenvalue")
    return Spectrum(lam, {"source": "analytic", "kind": domain.kind,
                          "params": domain.params},
                    completeness=lam_max, volume=domain.area,
                    boundary_length=domain.perimeter)


def _rect_eigs(a: float, b: float, lam_max: float) -> np.ndarray:
    m_max = int(math.floor(a * math.sqrt(lam_max) / math.pi))
    n_max = int(math.floor(b * math.sqrt(lam_max) / math.pi))
    if m_max < 1 or n_max < 1:
        return np.empty(0)
    m = np.arange(1, m_max + 1)
    n = np.arange(1, n_max + 1)
    lam = math.pi**2 * (m[:, None] ** 2 / a**2 + n[None, :] ** 2 / b**2)
    lam = lam[lam <= lam_max]
    return np.sort(lam.ravel())


def _bessel_eigs(radius: float, lam_max: float, orders) -> np.ndarray:
    """Bessel-zero eigenvalues; orders=None -> disk, orders=alpha -> sector."""
    x_max = radius * math.sqrt(lam_max)
    out = []
    k = 0 if orders is None else 1
    while True:
        nu = float(k) if orders is None else k / orders
        if nu > x_max:  # first zero of J_nu exceeds nu
            break
        zeros = bessel_zeros_upto(nu, x_max)
        if zeros.size == 0:
            break
        lam = (zeros / radius) ** 2
        out.append(lam)
        if orders is None and k >= 1:
            out.append(lam)  # angular multiplicity 2 on the disk
        k += 1
    if not out:
        return np.empty(0)
    return np.sort(np.concatenate(out))


# ---------------------------------------------------------------------------
# Finite-difference discretization
# ---------------------------------------------------------------------------

@dataclass
class DiscreteOperator:
    """5-point Dirichlet Laplacian with a diagonal conformal weight.

    Generalized problem A x = lambda W x, W = diag(exp(2 u sigma)), reduced
    to the symmetric B = W^{-1/2} A W^{-1/2}.  Slit nodes carry the Dirichlet
    condition, so stencils never couple opposite slit sides.
    """

    domain: Domain
    h: float
    nodes: np.ndarray  # (n, 2) interior node coordinates
    A: sps.csr_matrix
    w: np.ndarray  # diagonal conformal weights at nodes
    u: float
    metric: Optional[MetricSpec] = None

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    def symmetrized(self) -> sps.csr_matrix:
        d = 1.0 / np.sqrt(self.w)
        return sps.diags(d) @ self.A @ sps.diags(d)


def assemble_fdm(domain: Domain, metric: Optional[MetricSpec] = None,
                 u: Optional[float] = None, h: float = 1 / 64) -> DiscreteOperator:
    """Assemble the finite-difference operator on a lattice of spacing h.

    Supported: rectangles and (slit-)polygons whose slits lie on grid lines.
    Cone corners (alpha > 2) cannot be planar-embedded and are rejected; use
    the analytic sector spectrum or the wedge module instead.
    """
    if any(c.alpha > 2 + 1e-12 for c in domain.corners):
        raise SpecError("FDM unsupported for cone corners (alpha > 2); "
                        "use the analytic sector route")
    if domain.kind == "rectangle":
        verts = np.array([[0.0, 0.0], [domain.params["a"], 0.0],
                          [domain.params["a"], domain.params["b"]],
                          [0.0, domain.params["b"]]])
    elif domain.vertices is not None:
        verts = domain.vertices
    else:
        raise SpecError(f"FDM unsupported for kind {domain.kind!r}")

    x0, y0 = verts.min(axis=0)
    x1, y1 = verts.max(axis=0)
    nx, ny = (x1 - x0) / h, (y1 - y0) / h
    if abs(nx - round(nx)) > 1e-9 or abs(ny - round(ny)) > 1e-9:
        raise SpecError("grid spacing h must divide the domain bounding box")
    nx, ny = int(round(nx)), int(round(ny))
    for sl in domain.slits:
        off = (sl - [x0, y0]) / h
        if not np.allclose(off, np.round(off), atol=1e-9):
            raise SpecError("slit vertices must lie on grid lines for spacing h")
    if domain.slits and h > 0.5 * min(
            float(np.hypot(*(sl[j + 1] - sl[j])))
            for sl in domain.slits for j in range(len(sl) - 1)):
        raise SpecError("grid too coarse to separate slit sides; reduce h")

    xs = x0 + h * np.arange(nx + 1)
    ys = y0 + h * np.arange(ny + 1)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    pts = np.column_stack([X.ravel(), Y.ravel()])
    interior = domain.contains(pts)
    for sl in domain.slits:
        for j in range(len(sl) - 1):
            interior &= ~_on_closed_segment(pts, sl[j], sl[j + 1], tol=1e-9 * h)
    interior = interior.reshape(nx + 1, ny + 1)
    # boundary lattice lines are never interior
    interior[0, :] = interior[-1, :] = False
    interior[:, 0] = interior[:, -1] = False

    idx = -np.ones((nx + 1, ny + 1), dtype=np.int64)
    ii, jj = np.nonzero(interior)
    n = ii.size
    if n == 0:
        raise SpecError("grid too coarse: no interior nodes")
    idx[ii, jj] = np.arange(n)
    nodes = np.column_stack([xs[ii], ys[jj]])

    rows, cols, vals = [np.arange(n)], [np.arange(n)], [np.full(n, 4.0 / h**2)]
    for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        ni, nj = ii + di, jj + dj
        ok = (ni >= 0) & (ni <= nx) & (nj >= 0) & (nj <= ny)
        nbr = np.where(ok, idx[ni % (nx + 1), nj % (ny + 1)], -1)
        has = nbr >= 0
        rows.append(np.arange(n)[has])
        cols.append(nbr[has])
        vals.append(np.full(int(has.sum()), -1.0 / h**2))
    A = sps.csr_matrix((np.concatenate(vals),
                        (np.concatenate(rows), np.concatenate(cols))),
                       shape=(n, n))

    if metric is None:
        metric = MetricSpec.flat()
    if u is None:
        u = metric.u
    sigma = metric.sigma
    if sigma.is_zero() or u == 0.0:
        w = np.ones(n)
    else:
        w = np.exp(2.0 * u * sigma(nodes[:, 0], nodes[:, 1]))
    return DiscreteOperator(domain, h, nodes, A, w, u, metric)


def _on_closed_segment(pts: np.ndarray, a, b, tol: float) -> np.ndarray:
    ab = np.asarray(b) - np.asarray(a)
    L = float(np.hypot(*ab))
    ap = pts - np.asarray(a)[None, :]
    cross = np.abs(ab[0] * ap[:, 1] - ab[1] * ap[:, 0]) / L
    s = (ap @ ab) / (L * L)
    return (cross <= tol) & (s >= -tol / L) & (s <= 1 + tol / L)


@dataclass
class Eigenpair:
    """Discrete eigenpair; phi is normalized in the weighted inner product

    <phi, phi>_w = sum_i phi_i^2 w_i h^2 = 1,
    the discrete analogue of the unit L^2(dVol_u) norm.
    """

    lam: float
    phi: np.ndarray


@dataclass
class DiscreteSpectrum:
    """Bundle of eigenpairs over one DiscreteOperator."""

    op: DiscreteOperator
    pairs: list[Eigenpair]

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.array([p.lam for p in self.pairs])

    def completeness(self) -> float:
        return 0.8 * self.pairs[-1].lam

    def spectrum(self) -> Spectrum:
        vol = float(np.sum(self.op.w) * self.op.h**2)
        return Spectrum(self.eigenvalues,
                        {"source": "discrete", "h": self.op.h,
                         "grid_nodes": self.op.n_nodes, "u": self.op.u},
                        completeness=self.completeness(), volume=vol)

    def weighted_trace(self, psi, t: float) -> float:
        """Sum e^{-t lam_n} * (discrete quadrature of psi |phi_n|^2 dVol_u)."""
        psi = as_field(psi)
        nodes, w, h = self.op.nodes, self.op.w, self.op.h
        pv = psi(nodes[:, 0], nodes[:, 1])
        lam = self.eigenvalues
        weights = np.array([float(np.sum(pv * p.phi**2 * w)) * h**2
                            for p in self.pairs])
        return float(np.sum(np.exp(-t * lam) * weights))


def richardson_spectrum(domain: Domain, metric: Optional[MetricSpec], h: float,
                        k: int, seed: int = 0) -> Spectrum:
    """Eigenvalue-wise Richardson extrapolation (4 lam_{h/2} - lam_h)/3.

    Sorting pairs modes across the two grids; O(h^2) eigenvalue errors cancel
    to O(h^4) away from slit tips (reduced order near tips is measured, not
    assumed).
    """
    coarse = solve_eigs(assemble_fdm(domain, metric, h=h), k, seed=seed)
    fine = solve_eigs(assemble_fdm(domain, metric, h=h / 2), k, seed=seed)
    lam = (4 * fine.eigenvalues - coarse.eigenvalues) / 3
    lam = np.sort(lam)
    vol = float(np.sum(fine.op.w) * fine.op.h**2)
    per = None
    if fine.op.metric is not None:
        sig, uu = fine.op.metric.sigma, fine.op.u
        if sig.is_zero() or uu == 0.0:
            per = domain.perimeter
    return Spectrum(lam, {"source": "discrete", "h": h, "richardson": True,
                          "u": fine.op.u},
                    completeness=0.8 * lam[-1], volume=vol,
                    boundary_length=per)


def solve_eigs(op: DiscreteOperator, k: int, seed: int = 0) -> DiscreteSpectrum:
    """k smallest eigenpairs of A x = lambda W x via shift-invert Lanczos.

    Residuals ||A x - lam W x|| / ||x|| are checked against 1e-8 * lam.
    """
    n = op.n_nodes
    if not (1 <= k <= n - 1):
        raise SpecError(f"solve_eigs requires 1 <= k <= {n - 1}")
    B = op.symmetrized().tocsc()
    rng = np.random.default_rng(seed)
    v0 = rng.standard_normal(n)
    try:
        lam, Y = spsla.eigsh(B, k=k, sigma=0.0, which="LM", v0=v0, tol=0)
    except Exception as exc:  # ARPACK failures surface as various types
        raise NumericalError("solve_eigs", f"eigensolver failed: {exc}") from exc
    order = np.argsort(lam)
    lam, Y = lam[order], Y[:, order]
    resid = np.linalg.norm(B @ Y - Y * lam[None, :], axis=0)
    worst = float(np.max(resid / np.maximum(lam, 1e-300)))
    if worst > 1e-8:
        raise NumericalError("solve_eigs",
                             f"residual {worst:.3g} exceeds 1e-8 contract")
    # back-transform x = W^{-1/2} y and renormalize in the weighted product
    sqrt_w = np.sqrt(op.w)
    pairs = []
    for j in range(k):
        phi = (Y[:, j] / sqrt_w) / op.h  # <phi,phi>_w = sum y^2 = 1
        pairs.append(Eigenpair(float(lam[j]), phi))
    return DiscreteSpectrum(op, pairs)
