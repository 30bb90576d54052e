"""Differential-geometric kernel for parametric immersions.

Everything is computed from exact chart jets: the Jacobian gives the induced
metric and the tangent frame, the normal projection of the second derivatives
gives the vector-valued second fundamental form, and its metric trace gives
the mean curvature vector.  The position split X = X^T + X^perp and the
extrinsic radius r = |X| feed all radial-function calculus.

Operations are batched over sample points and pure, so concurrent evaluation
on a shared immersion is safe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import dsl
from .charts import ChartDefinition, ParamSpec, chart_from_sources
from .errors import ImproperWindow, OriginSingularity, RankDeficient

RANK_TOL = 1e-10
ORIGIN_EXCLUSION = 1e-6


def unit_sphere_volume(d: int) -> float:
    """Volume of the unit d-sphere S^d(1); S^0 is two points."""
    return 2.0 * math.pi ** ((d + 1) / 2.0) / math.gamma((d + 1) / 2.0)


def sphere_volume(d: int, radius: float) -> float:
    return unit_sphere_volume(d) * radius**d


def ball_volume(d: int, radius: float) -> float:
    """Volume of the Euclidean d-ball of the given radius."""
    return math.pi ** (d / 2.0) / math.gamma(d / 2.0 + 1.0) * radius**d


@dataclass(frozen=True)
class RadialStructure:
    """Product decomposition F x R^q with r^2 = offset^2 + |y|^2.

    Radial integrals over such immersions collapse to one dimension:
    integral of f(r) dV = fiber_volume * vol(S^(q-1)) * int f(sqrt(off^2+t^2)) t^(q-1) dt.
    The chart axes from ``euclid_start`` on are the Cartesian block y;
    geometric quantities are constant on fiber x {|y| = t} orbits.
    """

    offset: float
    euclid_dim: int
    fiber_volume: float
    fiber_dim: int
    euclid_start: int = 0

    def scaled(self, c: float) -> "RadialStructure":
        return RadialStructure(
            self.offset * c,
            self.euclid_dim,
            self.fiber_volume * c**self.fiber_dim,
            self.fiber_dim,
            self.euclid_start,
        )


@dataclass(frozen=True)
class Immersion:
    """A chart together with the global facts the numerics rely on."""

    chart: ChartDefinition
    properness_radius: float  # extrinsic balls D_R with R below this live in the box
    name: str = "chart"
    proper: bool = True  # False: the window cuts the region (diagnostics only)
    compact: bool = False
    constant_radius: float | None = None  # set when r is constant on the image
    total_volume: float | None = None
    radial: RadialStructure | None = None
    chart_cover: int = 1  # how many times the chart covers the image
    notes: tuple[str, ...] = field(default=(), compare=False)

    @property
    def dim(self) -> int:
        return self.chart.dim

    @property
    def ambient_dim(self) -> int:
        return self.chart.ambient_dim

    def require_window(self, R: float) -> None:
        if R > self.properness_radius * (1 + 1e-12) and not self.compact:
            raise ImproperWindow(
                f"radius {R} exceeds the properness window "
                f"{self.properness_radius:.6g} of {self.name}"
            )


def scale_immersion(imm: Immersion, c: float) -> Immersion:
    """The immersion c*X, built from rescaled coordinate expressions."""
    if c <= 0:
        raise ValueError("scale factor must be positive")
    old = imm.chart
    sources = old.sources or tuple(dsl.to_source(e) for e in old.coords)
    scaled = chart_from_sources(
        old.dim,
        old.codim_total,
        tuple(f"({c!r})*({src})" for src in sources),
        old.params,
    )
    return replace(
        imm,
        chart=scaled,
        name=f"{imm.name}*{c:.6g}",
        properness_radius=imm.properness_radius * c,
        constant_radius=None if imm.constant_radius is None else imm.constant_radius * c,
        total_volume=None if imm.total_volume is None else imm.total_volume * c**old.dim,
        radial=None if imm.radial is None else imm.radial.scaled(c),
    )


# --- pointwise geometry -------------------------------------------------------


@dataclass
class PointGeometry:
    """Batched first/second-order data at sample points (leading axis = batch)."""

    points: np.ndarray  # (N, n)
    X: np.ndarray  # (N, A) ambient positions
    jac: np.ndarray  # (N, A, n)
    metric: np.ndarray  # (N, n, n)
    metric_inv: np.ndarray
    sqrt_det: np.ndarray  # (N,)
    frame: np.ndarray  # (N, A, n) orthonormal tangent frame
    r: np.ndarray  # (N,)
    XT: np.ndarray  # (N, A) tangential part of the position
    Xperp: np.ndarray  # (N, A) normal part
    alpha: np.ndarray | None = None  # (N, A, n, n) second fundamental form
    H: np.ndarray | None = None  # (N, A) mean curvature vector
    normA2: np.ndarray | None = None  # (N,) squared norm of the shape tensor

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def grad_r_norm(self) -> np.ndarray:
        """|grad^Sigma r| = |X^T| / r."""
        return np.linalg.norm(self.XT, axis=1) / self.r

    @property
    def x_dot_h(self) -> np.ndarray:
        return np.einsum("na,na->n", self.X, self.H)

    @property
    def normH(self) -> np.ndarray:
        return np.linalg.norm(self.H, axis=1)

    def select(self, mask) -> "PointGeometry":
        """Restrict the batch to the masked points."""
        pick = lambda a: None if a is None else a[mask]
        return PointGeometry(
            points=self.points[mask],
            X=self.X[mask],
            jac=self.jac[mask],
            metric=self.metric[mask],
            metric_inv=self.metric_inv[mask],
            sqrt_det=self.sqrt_det[mask],
            frame=self.frame[mask],
            r=self.r[mask],
            XT=self.XT[mask],
            Xperp=self.Xperp[mask],
            alpha=pick(self.alpha),
            H=pick(self.H),
            normA2=pick(self.normA2),
        )


def evaluate_chart(chart: ChartDefinition, points, order: int = 2):
    """Stack per-coordinate jets into X (N,A), J (N,A,n) and S (N,A,n,n)."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    npts, dim = points.shape
    amb = chart.ambient_dim
    X = np.empty((npts, amb))
    J = np.empty((npts, amb, dim)) if order >= 1 else None
    S = np.empty((npts, amb, dim, dim)) if order >= 2 else None
    for a, expr in enumerate(chart.coords):
        jet = dsl.eval_jet(expr, points, order=order)
        X[:, a] = jet.value
        if order >= 1:
            J[:, a, :] = jet.grad
        if order >= 2:
            S[:, a, :, :] = jet.hess
    return points, X, J, S


def geometry(imm: Immersion, points, order: int = 2) -> PointGeometry:
    """Fundamental forms, curvature and position splits at a batch of points."""
    points, X, J, S = evaluate_chart(imm.chart, points, order=max(order, 1))
    sv = np.linalg.svd(J, compute_uv=False)
    bad = sv[:, -1] <= RANK_TOL * sv[:, 0]
    if np.any(bad):
        raise RankDeficient(points[np.argmax(bad)])

    g = np.einsum("nai,naj->nij", J, J)
    g_inv = np.linalg.inv(g)
    sqrt_det = np.sqrt(np.linalg.det(g))
    frame, _ = np.linalg.qr(J)  # orthonormal tangent columns, deterministic

    r = np.linalg.norm(X, axis=1)
    XT = np.einsum("nai,nbi,nb->na", frame, frame, X)
    Xperp = X - XT

    geom = PointGeometry(
        points=points,
        X=X,
        jac=J,
        metric=g,
        metric_inv=g_inv,
        sqrt_det=sqrt_det,
        frame=frame,
        r=r,
        XT=XT,
        Xperp=Xperp,
    )
    if order >= 2:
        npts, amb, dim = J.shape
        flat = S.reshape(npts, amb, dim * dim)
        tang = np.einsum("nai,nbi,nbk->nak", frame, frame, flat)
        alpha = (flat - tang).reshape(npts, amb, dim, dim)
        geom.alpha = alpha
        geom.H = np.einsum("nij,naij->na", g_inv, alpha)
        geom.normA2 = np.einsum(
            "nik,njl,naij,nakl->n", g_inv, g_inv, alpha, alpha
        )
    return geom


def point_geometry(imm: Immersion, p) -> PointGeometry:
    """Single-point convenience wrapper (batch of one)."""
    return geometry(imm, np.atleast_2d(p), order=2)


def radius_values(imm: Immersion, points) -> np.ndarray:
    """Extrinsic radius r = |X| without derivative bookkeeping."""
    _, X, _, _ = evaluate_chart(imm.chart, points, order=0)
    return np.linalg.norm(X, axis=1)


# --- radial-function calculus ---------------------------------------------------


@dataclass(frozen=True)
class RadialFunction:
    """F(r) with two derivatives, for the radial Laplacian identity."""

    f: callable
    df: callable
    ddf: callable
    label: str = "F"

    @staticmethod
    def r_squared() -> "RadialFunction":
        return RadialFunction(
            lambda s: s**2, lambda s: 2.0 * s, lambda s: np.full_like(s, 2.0), "r^2"
        )

    @staticmethod
    def neg_r_squared() -> "RadialFunction":
        return RadialFunction(
            lambda s: -(s**2), lambda s: -2.0 * s, lambda s: np.full_like(s, -2.0), "-r^2"
        )

    @staticmethod
    def shifted_inverse_power(eps: float) -> "RadialFunction":
        """(1 - r^(-eps))/eps: the bounded increasing probe used near suprema."""
        return RadialFunction(
            lambda s: (1.0 - s ** (-eps)) / eps,
            lambda s: s ** (-eps - 1.0),
            lambda s: -(eps + 1.0) * s ** (-eps - 2.0),
            f"(1 - r^-{eps})/{eps}",
        )


def radial_laplacian(
    geom: PointGeometry, F: RadialFunction, exclusion: float = ORIGIN_EXCLUSION
) -> np.ndarray:
    """Laplace-Beltrami of F(r) from the position split:

        (F''/r^2 - F'/r^3)|X^T|^2 + (F'/r)(n + <X, H>)
    """
    if geom.H is None:
        raise ValueError("radial_laplacian needs order-2 geometry")
    r = geom.r
    if np.any(r < exclusion):
        raise OriginSingularity(float(r.min()), exclusion)
    n = geom.dim
    xt2 = np.einsum("na,na->n", geom.XT, geom.XT)
    return (F.ddf(r) / r**2 - F.df(r) / r**3) * xt2 + (F.df(r) / r) * (
        n + geom.x_dot_h
    )


def laplacian_divergence_form(imm: Immersion, fn, p, h: float = 1e-4) -> float:
    """Independent oracle: (1/sqrt g) d_i(sqrt g g^{ij} d_j f) by central
    differences of first-order chart data on a structured stencil."""
    p = np.asarray(p, dtype=float)
    n = imm.dim

    def flux(q):
        g = geometry(imm, q.reshape(1, -1), order=1)
        grad_f = _fd_gradient(fn, q, h)
        return g.sqrt_det[0] * (g.metric_inv[0] @ grad_f)

    div = 0.0
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        div += (flux(p + e)[i] - flux(p - e)[i]) / (2 * h)
    g0 = geometry(imm, p.reshape(1, -1), order=1)
    return div / g0.sqrt_det[0]


def _fd_gradient(fn, p, h):
    n = len(p)
    out = np.zeros(n)
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        out[i] = (fn(p + e) - fn(p - e)) / (2 * h)
    return out
