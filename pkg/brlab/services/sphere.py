"""
Cap geometry on S^{n-1}: cap grids, separated subfamilies Z_ℓ, the partition of
unity φ^ν_j, rotations L_μ, bump fields Ψ^μ and their rectangles, and sampled
checks of cap and rectangle separation.
"""
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np
from scipy import sparse
from scipy.spatial import cKDTree

from brlab.core import DEFAULT_SEED
from brlab.errors import ConstructionError, DomainError
from brlab.logging_config import get_logger
from brlab.models.schemas import GeometryReport
from brlab.services.decomp import DyadicScale
from brlab.services.kernels import cutoff_phi

logger = get_logger(__name__)

FIBONACCI_DENSITY = 14.5
COVER_SAMPLES = 20_000
_GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))

# =============================================================================
# Core Data Structures
# =============================================================================


@dataclass
class CapGrid:
    """Cap centers ξ^ν_j with separation and cover certificates."""
    j: int
    n: int
    centers: np.ndarray
    min_sep: float
    cover_radius: float
    _tree: Optional[cKDTree] = field(default=None, init=False, repr=False, compare=False)

    @property
    def size(self) -> int:
        return self.centers.shape[0]

    @property
    def spacing_floor(self) -> float:
        return 2.0 ** (-self.j / 2.0 - 1.0)

    @property
    def cone_radius(self) -> float:
        return 2.0 ** (-self.j / 2.0 + 1.0)

    @property
    def tree(self) -> cKDTree:
        if self._tree is None:
            self._tree = cKDTree(self.centers)
        return self._tree

    def to_dict(self) -> Dict[str, Any]:
        return {"j": self.j, "n": self.n, "centers": self.centers.tolist(),
                "min_sep": self.min_sep, "cover_radius": self.cover_radius}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "CapGrid":
        return cls(j=int(data["j"]), n=int(data["n"]),
                   centers=np.asarray(data["centers"], dtype=float),
                   min_sep=float(data["min_sep"]), cover_radius=float(data["cover_radius"]))


@dataclass
class SubsetFamily:
    """Partition of the cap centers into c·2^{-j/2+σj}-separated subsets Z_1..Z_L."""
    parent: CapGrid
    sigma: float
    c: float
    subsets: List[List[int]]

    @property
    def separation(self) -> float:
        return self.c * 2.0 ** (-self.parent.j / 2.0 + self.sigma * self.parent.j)

    @property
    def L(self) -> int:
        return len(self.subsets)

    def subset(self, ell: int) -> List[int]:
        if not 1 <= ell <= self.L:
            raise DomainError(f"requires 1 ≤ ℓ ≤ {self.L} (got ℓ={ell})")
        return self.subsets[ell - 1]

    def to_dict(self) -> Dict[str, Any]:
        return {"parent": self.parent.to_dict(), "sigma": self.sigma, "c": self.c,
                "subsets": [list(map(int, s)) for s in self.subsets]}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SubsetFamily":
        return cls(parent=CapGrid.from_dict(data["parent"]), sigma=float(data["sigma"]),
                   c=float(data["c"]), subsets=[[int(i) for i in s] for s in data["subsets"]])


@dataclass
class BumpRectangle:
    """Rectangle R^μ_{j m} and its bump Ψ^μ in the frame of L_μ."""
    index: int
    direction: np.ndarray
    rotation: np.ndarray
    j: int
    m: int
    sigma: float
    lambda_m: float

    @property
    def radial_halfwidth(self) -> float:
        return 2.0 ** (self.sigma * self.j + 2.0)

    @property
    def transverse_halfwidth(self) -> float:
        return 2.0 ** ((0.5 + self.sigma) * self.j + 1.0)

    def local(self, x: np.ndarray) -> np.ndarray:
        """Rotated coordinates u = L_μ^T x (last axis)."""
        return np.asarray(x, dtype=float) @ self.rotation

    def contains(self, x: np.ndarray) -> np.ndarray:
        u = self.local(x)
        inside = np.abs(u[..., 0] - self.lambda_m) < self.radial_halfwidth
        if u.shape[-1] > 1:
            inside &= np.all(np.abs(u[..., 1:]) < self.transverse_halfwidth, axis=-1)
        return inside

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        """Uniform points of the open box, in original coordinates."""
        n = self.direction.size
        u = np.empty((count, n))
        u[:, 0] = self.lambda_m + self.radial_halfwidth * rng.uniform(-1.0, 1.0, count)
        u[:, 1:] = self.transverse_halfwidth * rng.uniform(-1.0, 1.0, (count, n - 1))
        return u @ self.rotation.T


# =============================================================================
# Grids
# =============================================================================


def _circle_grid(j: int) -> np.ndarray:
    count = math.ceil(math.pi / math.asin(2.0 ** (-j / 2.0 - 1.0)))
    angles = 2.0 * math.pi * np.arange(count) / count
    return np.column_stack([np.cos(angles), np.sin(angles)])


def _fibonacci_sphere(count: int) -> np.ndarray:
    k = np.arange(count) + 0.5
    z = 1.0 - 2.0 * k / count
    r = np.sqrt(1.0 - z * z)
    phi = _GOLDEN_ANGLE * k
    return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])


def _thin(points: np.ndarray, min_sep: float) -> np.ndarray:
    """Greedy thinning in index order: keep a point if no kept point is closer than min_sep."""
    tree = cKDTree(points)
    kept = np.zeros(points.shape[0], dtype=bool)
    for i, neighbours in enumerate(tree.query_ball_point(points, min_sep)):
        close = [k for k in neighbours if k != i and kept[k]
                 and np.linalg.norm(points[k] - points[i]) < min_sep]
        if not close:
            kept[i] = True
    return points[kept]


def random_directions(rng: np.random.Generator, count: int, n: int) -> np.ndarray:
    g = rng.standard_normal((count, n))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def cap_grid(j: int, n: int = 2, seed: int = DEFAULT_SEED) -> CapGrid:
    """Almost equally distributed centers with pairwise chords ≥ 2^{-j/2-1} and cover radius < 2^{-j/2+1}."""
    if j < 1:
        raise DomainError(f"requires j ≥ 1 (got {j})")
    if n not in (2, 3):
        raise DomainError(f"requires n ∈ {{2, 3}} (got {n})")
    floor = 2.0 ** (-j / 2.0 - 1.0)
    if n == 2:
        centers = _circle_grid(j)
    else:
        count = max(12, int(math.ceil(FIBONACCI_DENSITY * 2.0 ** j)))
        centers = _thin(_fibonacci_sphere(count), floor)

    tree = cKDTree(centers)
    nearest, _ = tree.query(centers, k=2)
    min_sep = float(nearest[:, 1].min())
    if n == 2:
        cover = 2.0 * math.sin(math.pi / (2 * centers.shape[0]))
        t = np.linspace(0.0, 2.0 * math.pi, 8 * centers.shape[0] + 1)
        probes = np.column_stack([np.cos(t), np.sin(t)])
    else:
        probes = random_directions(np.random.default_rng(seed), COVER_SAMPLES + 50 * centers.shape[0], n)
        cover = 0.0
    observed, _ = tree.query(probes)
    cover = max(cover, float(observed.max()))
    limit = 2.0 ** (-j / 2.0 + 1.0)
    if min_sep < floor * (1 - 1e-12):
        raise ConstructionError(f"cap grid j={j} n={n}: min chord {min_sep:g} < {floor:g}")
    if cover >= limit:
        raise ConstructionError(f"cap grid j={j} n={n}: cover radius {cover:g} ≥ {limit:g}")
    logger.debug("cap grid j=%d n=%d: %d centers, min_sep=%.4g cover=%.4g",
                 j, n, centers.shape[0], min_sep, cover)
    grid = CapGrid(j=j, n=n, centers=centers, min_sep=min_sep, cover_radius=cover)
    grid._tree = tree
    return grid


def select_subsets(grid: CapGrid, sigma: float, c: float) -> SubsetFamily:
    """Greedy maximal separated subsets, repeated on the remainder until exhausted."""
    if not 0.0 < sigma < 0.5:
        raise DomainError(f"requires 0 < σ < 1/2 (got {sigma!r})")
    if c <= 0:
        raise DomainError(f"requires c > 0 (got {c!r})")
    d = c * 2.0 ** (-grid.j / 2.0 + sigma * grid.j)
    neighbours = grid.tree.query_ball_point(grid.centers, d)
    remaining = list(range(grid.size))
    subsets: List[List[int]] = []
    while remaining:
        blocked = np.zeros(grid.size, dtype=bool)
        chosen: List[int] = []
        rest: List[int] = []
        for idx in remaining:
            if blocked[idx]:
                rest.append(idx)
                continue
            chosen.append(idx)
            for k in neighbours[idx]:
                if k != idx and np.linalg.norm(grid.centers[k] - grid.centers[idx]) < d:
                    blocked[k] = True
        subsets.append(chosen)
        remaining = rest
    logger.debug("Z family j=%d σ=%g c=%g: L=%d", grid.j, sigma, c, len(subsets))
    return SubsetFamily(parent=grid, sigma=sigma, c=c, subsets=subsets)


# =============================================================================
# Partition of unity
# =============================================================================


def _unit(xi: np.ndarray) -> np.ndarray:
    xi = np.asarray(xi, dtype=float)
    norms = np.linalg.norm(xi, axis=-1, keepdims=True)
    if np.any(norms == 0):
        raise DomainError("partition of unity is undefined at ξ = 0")
    return xi / norms


def partition_of_unity(grid: CapGrid, xi: Sequence[float]) -> Dict[int, float]:
    """Nonzero weights φ^ν_j(ξ) = ϕ(2^{j/2}|ξ/|ξ| - ξ^ν|) / Σ_ν ϕ(...) at a single ξ."""
    u = _unit(np.asarray(xi, dtype=float).reshape(-1))
    idx = sorted(grid.tree.query_ball_point(u, grid.cone_radius))
    if not idx:
        raise ConstructionError("no cap center within the cone radius; cover certificate broken")
    dist = np.linalg.norm(grid.centers[idx] - u, axis=1)
    bumps = cutoff_phi(2.0 ** (grid.j / 2.0) * dist)
    total = bumps.sum()
    return {int(k): float(b / total) for k, b in zip(idx, bumps) if b > 0}


def partition_weights(grid: CapGrid, xi: np.ndarray) -> sparse.csr_matrix:
    """All weights for many ξ (rows) as a sparse matrix with one column per cap."""
    u = _unit(np.asarray(xi, dtype=float).reshape(-1, grid.n))
    lists = grid.tree.query_ball_point(u, grid.cone_radius)
    counts = np.fromiter((len(l) for l in lists), dtype=np.int64, count=len(lists))
    rows = np.repeat(np.arange(u.shape[0]), counts)
    cols = np.fromiter((k for l in lists for k in sorted(l)), dtype=np.int64, count=int(counts.sum()))
    dist = np.linalg.norm(grid.centers[cols] - u[rows], axis=1)
    bumps = cutoff_phi(2.0 ** (grid.j / 2.0) * dist)
    totals = np.bincount(rows, weights=bumps, minlength=u.shape[0])
    if np.any(totals[counts > 0] <= 0) or np.any(counts == 0):
        raise ConstructionError("partition of unity has an empty row; cover certificate broken")
    values = bumps / totals[rows]
    return sparse.csr_matrix((values, (rows, cols)), shape=(u.shape[0], grid.size))


def cap_weight(grid: CapGrid, index: int) -> Callable[[np.ndarray], np.ndarray]:
    """φ^ν_j as a callable on frequency vectors (zero at ξ = 0 and outside the cone)."""
    center = grid.centers[index]

    def weight(xi: np.ndarray) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        shape = xi.shape[:-1]
        flat = xi.reshape(-1, grid.n)
        out = np.zeros(flat.shape[0])
        norms = np.linalg.norm(flat, axis=1)
        live = norms > 0
        live[live] = np.linalg.norm(flat[live] / norms[live, None] - center, axis=1) < grid.cone_radius
        if live.any():
            out[live] = partition_weights(grid, flat[live])[:, index].toarray().ravel()
        return out.reshape(shape)

    return weight


# =============================================================================
# Rotations and bumps
# =============================================================================


def rotation_to_pole(center: Sequence[float]) -> np.ndarray:
    """Orthogonal L with det L = 1 and L^T center = e_1 (Householder plus one sign flip)."""
    c = np.asarray(center, dtype=float).reshape(-1)
    if abs(np.linalg.norm(c) - 1.0) > 1e-12:
        raise DomainError(f"requires a unit vector (|center| = {np.linalg.norm(c)!r})")
    n = c.size
    e1 = np.zeros(n)
    e1[0] = 1.0
    flip = np.ones(n)
    if c[0] >= 0:
        v = c + e1
        flip[0] = -1.0
    else:
        v = c - e1
        flip[-1] = -1.0
    house = np.eye(n) - 2.0 * np.outer(v, v) / np.dot(v, v)
    return house * flip[None, :]


def bump_rectangle(grid: CapGrid, index: int, scale: DyadicScale, m: int) -> BumpRectangle:
    lambda_m = scale.interval(m)[1]
    center = grid.centers[index]
    return BumpRectangle(index=index, direction=center, rotation=rotation_to_pole(center),
                         j=scale.j, m=m, sigma=scale.sigma, lambda_m=lambda_m)


def bump_psi(rect: BumpRectangle, x: np.ndarray) -> np.ndarray:
    """Ψ^μ(x) = ϕ(2^{-σj-1}|λ_m - u_1|) Π_{i≥2} ϕ(2^{-(1/2+σ)j}|u_i|), u = L_μ^T x."""
    u = rect.local(x)
    value = cutoff_phi(2.0 ** (-rect.sigma * rect.j - 1.0) * np.abs(rect.lambda_m - u[..., 0]))
    for i in range(1, u.shape[-1]):
        value = value * cutoff_phi(2.0 ** (-(0.5 + rect.sigma) * rect.j) * np.abs(u[..., i]))
    return value


# =============================================================================
# Separation checks
# =============================================================================


def _cap_directions(rng: np.random.Generator, center: np.ndarray, radius: float,
                    count: int) -> np.ndarray:
    """Unit vectors within chord ``radius`` of ``center``."""
    n = center.size
    theta_max = 2.0 * math.asin(min(radius / 2.0, 1.0)) * (1.0 - 1e-9)
    g = rng.standard_normal((count, n))
    g -= np.outer(g @ center, center)
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    theta = theta_max * rng.uniform(0.0, 1.0, count) ** (1.0 / max(n - 1, 1))
    return np.cos(theta)[:, None] * center[None, :] + np.sin(theta)[:, None] * g


def check_separation_geometry(family: SubsetFamily, scale: DyadicScale, m: int, samples: int,
                              seed: int = DEFAULT_SEED, kappa: float = 1.0) -> GeometryReport:
    """Sample cap-pair separation, rectangle separation and disjointness inside each Z_ℓ.

    Cap pairs, on unit vectors: for ξ̂ in the cone of μ̄ ≠ μ and η̂ with
    L_μ η̂ in the cone of μ, either |[L_μ^T ξ̂ - η̂]_1| ≥ 1 or
    max_{i≥2} |[L_μ^T ξ̂ - η̂]_i| ≥ κ 2^{-j/2+σj}.
    Rectangles: for x in R^μ and u = L_ν^T x, either u_1 ∈ [-2λ_m, -λ_m/2]
    or max_{i≥2} |u_i| ≥ 2^{(1/2+σ)j+1}.
    """
    if samples < 1:
        raise DomainError("requires samples ≥ 1")
    grid = family.parent
    j, sigma, n = grid.j, family.sigma, grid.n
    report = GeometryReport(n=n, j=j, sigma=sigma, c=family.c, kappa=kappa, m=m, samples=samples,
                            pairs_available=False,
                            notes=["'≈ -2^j' read as u_1 within [-2λ_m, -λ_m/2]",
                                   "'≈ 2' read as |[L^T ξ̂ - η̂]_1| ≥ 1 on unit directions",
                                   "radial ranges 1/10 < |ξ| ≤ 10 and 1/3 < |η| ≤ 3 are not sampled"])
    eligible = [s for s in family.subsets if len(s) >= 2]
    if not eligible:
        report.notes.append("every subset is a single cap: vacuous pass")
        return report
    report.pairs_available = True
    rng = np.random.default_rng(seed)
    lambda_m = scale.interval(m)[1]
    cone = grid.cone_radius
    s = 2.0 ** (-j / 2.0 + sigma * j)
    e1 = np.zeros(n)
    e1[0] = 1.0
    rects = {}

    def rect(idx: int) -> BumpRectangle:
        if idx not in rects:
            rects[idx] = bump_rectangle(grid, idx, scale, m)
        return rects[idx]

    picks = rng.integers(0, len(eligible), samples)
    cap_margins = np.empty(samples)
    rect_margins = np.empty(samples)
    overlaps = 0
    for k in range(samples):
        subset = eligible[picks[k]]
        mu, nu = rng.choice(len(subset), size=2, replace=False)
        mu, nu = subset[mu], subset[nu]
        r_mu, r_nu = rect(mu), rect(nu)

        xi_hat = _cap_directions(rng, grid.centers[nu], cone, 1)[0]
        eta_hat = _cap_directions(rng, e1, cone, 1)[0]
        d = r_mu.local(xi_hat) - eta_hat
        branch_a = abs(d[0]) - 1.0
        branch_b = np.max(np.abs(d[1:])) / (kappa * s) - 1.0 if n > 1 else -1.0
        cap_margins[k] = max(branch_a, branch_b)

        x = r_mu.sample(rng, 1)[0]
        u = r_nu.local(x)
        branch_a = min(u[0] + 2.0 * lambda_m, -0.5 * lambda_m - u[0]) / lambda_m
        branch_b = np.max(np.abs(u[1:])) / r_nu.transverse_halfwidth - 1.0
        rect_margins[k] = max(branch_a, branch_b)
        if r_nu.contains(x) or bump_psi(r_mu, x) * bump_psi(r_nu, x) != 0.0:
            overlaps += 1

    report.cap_pair_violations = int(np.sum(cap_margins < 0))
    report.cap_pair_min_margin = float(cap_margins.min())
    report.rectangle_violations = int(np.sum(rect_margins < 0))
    report.rectangle_min_margin = float(rect_margins.min())
    report.overlap_count = overlaps
    logger.info("geometry j=%d c=%g: violations %d/%d, overlaps %d", j, family.c,
                report.cap_pair_violations, report.rectangle_violations, overlaps)
    return report


def separation_constant_scan(grid: CapGrid, sigma: float, scale: DyadicScale, m: int,
                             c_values: Sequence[float], samples: int,
                             seed: int = DEFAULT_SEED) -> Dict[str, Any]:
    """Violation counts per c and the smallest c with none (vacuous families excluded)."""
    rows = []
    smallest = None
    for c in sorted(c_values):
        family = select_subsets(grid, sigma, c)
        rep = check_separation_geometry(family, scale, m, samples, seed)
        rows.append({"c": float(c), "L": family.L, "vacuous": rep.vacuous,
                     "cap_pair_violations": rep.cap_pair_violations,
                     "rectangle_violations": rep.rectangle_violations,
                     "overlaps": rep.overlap_count})
        if smallest is None and rep.passed and not rep.vacuous:
            smallest = float(c)
    return {"rows": rows, "smallest_c": smallest}
