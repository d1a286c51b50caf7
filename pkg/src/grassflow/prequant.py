"""Transgression forms, chain integrals and holonomy through fillings.

The prequantum bundle is never built.  Holonomy is read off as the integral of
an integral closed form over a filling chain, reduced mod 1; two fillings of
the same boundary data differ by an integer.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.integrate import quad, simpson

from .ambient import AmbientSpace, DifferentialForm, area_form, det3, trig_shear
from .errors import DegreeMismatchError, GrassflowError, ResolutionError, SpaceMismatchError

MIN_RESOLUTION = 8
FD_REL_STEP = 1e-5


# --------------------------------------------------------------------------- diffeotopies


@dataclass(frozen=True)
class DiffeoPath:
    """phi_t for t in [0, 1] with phi_0 = id.

    ``velocity(t, p) = d/dt phi_t(p)`` and ``tangent(t, p) = T phi_t(p)``.
    """

    space: AmbientSpace
    map: Callable
    velocity: Callable
    tangent: Callable
    name: str = "path"

    def identity_error(self, points) -> float:
        return float(np.max(np.abs(self.map(0.0, points) - points)))


def constant_path(space: AmbientSpace) -> DiffeoPath:
    eye = np.eye(3)
    return DiffeoPath(
        space,
        lambda t, p: np.array(p, float),
        lambda t, p: np.zeros(np.shape(p)),
        lambda t, p: np.broadcast_to(eye, np.shape(p)[:-1] + (3, 3)),
        "id",
    )


def translation_path(c, space: AmbientSpace) -> DiffeoPath:
    c = np.asarray(c, float)
    eye = np.eye(3)
    return DiffeoPath(
        space,
        lambda t, p: p + t * c,
        lambda t, p: np.broadcast_to(c, np.shape(p)),
        lambda t, p: np.broadcast_to(eye, np.shape(p)[:-1] + (3, 3)),
        f"trans{tuple(c)}",
    )


def shear_path(a: float, b: float, space: AmbientSpace) -> DiffeoPath:
    """phi_t = trig_shear(t a, t b)."""
    w = 2 * np.pi

    def velocity(t, p):
        x, y = p[..., 0], p[..., 1]
        return np.stack([0 * x, a * np.sin(w * x), b * np.sin(w * (x + y))], axis=-1)

    return DiffeoPath(
        space,
        lambda t, p: trig_shear(t * a, t * b, space)(p),
        velocity,
        lambda t, p: trig_shear(t * a, t * b, space).T(p),
        f"shear_path({a:g},{b:g})",
    )


def lambda_path_form(path: DiffeoPath, alpha: DifferentialForm, at, v1, v2, panels: int = 32) -> float:
    """lambda_phi(v1, v2) at ``at``: -int_0^1 alpha(phi_t p)(phi_dot, T v1, T v2) dt.

    Composite Simpson rule with ``panels`` (even) subintervals.
    """
    if alpha.degree != 3:
        raise DegreeMismatchError("lambda_path_form expects a 3-form")
    if panels < 2 or panels % 2:
        raise ResolutionError("Simpson needs an even number of panels >= 2")
    t = np.linspace(0.0, 1.0, panels + 1)
    p = np.broadcast_to(np.asarray(at, float), (panels + 1, 3))
    T = np.stack([path.tangent(ti, p[0]) for ti in t])
    q = np.stack([path.map(ti, p[0]) for ti in t])
    V = np.stack([path.velocity(ti, p[0]) for ti in t])
    vals = alpha(q, V, T @ np.asarray(v1, float), T @ np.asarray(v2, float))
    return -float(simpson(vals, x=t))


def lambda_exactness_residual(path: DiffeoPath, alpha: DifferentialForm, at, scale: float,
                              panels: int = 32, pulled_alpha: DifferentialForm | None = None) -> float:
    """|(d lambda)(e1, e2, e3) - (alpha - phi_1^* alpha)(e1, e2, e3)| at ``at``.

    d lambda is the boundary flux of lambda over a cube of side ``scale``
    divided by its volume (one midpoint per face), so the residual is
    O(scale^2) plus time-quadrature error.
    """
    c = np.asarray(at, float)
    E = np.eye(3)
    flux = 0.0
    for a in range(3):
        b, d = (a + 1) % 3, (a + 2) % 3
        for sign in (1.0, -1.0):
            flux += sign * lambda_path_form(path, alpha, c + sign * 0.5 * scale * E[a], E[b], E[d], panels)
    d_lambda = flux * scale ** 2 / scale ** 3
    T1 = path.tangent(1.0, c)
    pulled = alpha(path.map(1.0, c), T1 @ E[0], T1 @ E[1], T1 @ E[2])
    rhs = alpha(c, E[0], E[1], E[2]) - pulled
    return abs(float(d_lambda - rhs))


# --------------------------------------------------------------------------- sweeps and chain integrals


@dataclass(frozen=True)
class SweepMap:
    """Closed-form map from a parameter box into the ambient space.

    Three parameters ``(s, t, theta)`` sweep a loop; two parameters
    ``(s, theta)`` sweep a point-loop (used on the sphere).  The last
    parameter is the loop parameter and is periodic up to a lattice shift.
    """

    func: Callable
    space: AmbientSpace
    resolution: tuple[int, ...]
    bounds: tuple[tuple[float, float], ...] | None = None
    name: str = "sweep"

    def __post_init__(self):
        k = len(self.resolution)
        if k not in (2, 3):
            raise ResolutionError("a sweep has 2 or 3 parameters")
        if min(self.resolution) < MIN_RESOLUTION:
            raise ResolutionError(f"resolution {self.resolution} below {MIN_RESOLUTION} per axis")
        if self.bounds is None:
            object.__setattr__(self, "bounds", tuple((0.0, 1.0) for _ in range(k)))
        elif len(self.bounds) != k:
            raise ResolutionError("bounds and resolution disagree on the parameter count")

    @property
    def params(self) -> int:
        return len(self.resolution)

    def __call__(self, *args):
        return np.asarray(self.func(*(np.asarray(a, float) for a in args)), float)

    def restrict(self, axis: int, lo: float, hi: float, resolution: int) -> "SweepMap":
        bounds = list(self.bounds)
        bounds[axis] = (lo, hi)
        res = list(self.resolution)
        res[axis] = resolution
        return SweepMap(self.func, self.space, tuple(res), tuple(bounds), self.name)

    def reversed(self) -> "SweepMap":
        """Same image with the first parameter reversed (opposite orientation)."""
        (lo, hi), *rest = self.bounds
        f = self.func
        return SweepMap(lambda s, *r: f(lo + hi - s, *r), self.space, self.resolution, self.bounds,
                        f"-{self.name}")

    def nodes(self):
        axes = []
        for (lo, hi), n in zip(self.bounds, self.resolution):
            h = (hi - lo) / n
            axes.append((lo + (np.arange(n) + 0.5) * h, h))
        return axes

    def partials(self, grids: Sequence[np.ndarray]) -> list[np.ndarray]:
        out = []
        for k, (lo, hi) in enumerate(self.bounds):
            d = FD_REL_STEP * (hi - lo)
            plus = list(grids)
            minus = list(grids)
            plus[k] = grids[k] + d
            minus[k] = grids[k] - d
            out.append((self(*plus) - self(*minus)) / (2 * d))
        return out


def chain_integral(sweep: SweepMap, alpha: DifferentialForm) -> float:
    """Tensor-product midpoint rule for the pulled-back top form over the box."""
    if alpha.degree != sweep.params:
        raise DegreeMismatchError(f"{alpha.degree}-form over a {sweep.params}-parameter sweep")
    if alpha.space != sweep.space:
        raise SpaceMismatchError("form and sweep live on different spaces")
    axes = sweep.nodes()
    grids = np.meshgrid(*(a for a, _ in axes), indexing="ij")
    P = sweep(*grids)
    D = sweep.partials(grids)
    cell = float(np.prod([h for _, h in axes]))
    return float(np.sum(alpha(P, *D)) * cell)


class BoundaryMismatch(GrassflowError):
    pass


def _face_points(sweep: SweepMap, axis: int, value: float, samples: int = 16):
    others = [k for k in range(sweep.params) if k != axis]
    axes = []
    for k in others:
        lo, hi = sweep.bounds[k]
        axes.append(lo + (np.arange(samples) + 0.5) * (hi - lo) / samples)
    grids = np.meshgrid(*axes, indexing="ij")
    args = []
    it = iter(grids)
    for k in range(sweep.params):
        args.append(np.full_like(grids[0], value) if k == axis else next(it))
    P = sweep(*args)
    partials = [D for k, D in enumerate(sweep.partials(args)) if k != axis]
    return P, partials


def _face_is_null(partials) -> bool:
    if len(partials) == 1:
        return bool(np.max(np.linalg.norm(partials[0], axis=-1)) < 1e-9)
    return bool(np.max(np.linalg.norm(np.cross(partials[0], partials[1]), axis=-1)) < 1e-9)


def _alpha_vanishes(alpha: DifferentialForm, P) -> bool:
    E = np.eye(3)
    vecs = [np.broadcast_to(E[k], P.shape) for k in range(alpha.degree)]
    if alpha.space.kind == "sphere":
        # tangent frame at p: any two vectors spanning T_p S^2
        a = np.cross(P, np.broadcast_to(E[2], P.shape)) + np.cross(P, np.broadcast_to(E[0], P.shape))
        b = np.cross(P, a)
        vecs = [a, b]
    return bool(np.max(np.abs(alpha(P, *vecs))) < 1e-12)


def boundary_mismatch(A: SweepMap, B: SweepMap, alpha: DifferentialForm) -> float:
    """Largest boundary disagreement that matters for ``alpha``.

    Faces are those of the non-loop parameters.  A face pair counts as matching
    when the images agree modulo the lattice, when both faces are degenerate
    (zero-measure image), or when ``alpha`` vanishes on both (relative cycles).
    """
    if A.params != B.params or A.bounds != B.bounds:
        raise BoundaryMismatch("sweeps have different parameter boxes")
    worst = 0.0
    for axis in range(A.params - 1):
        for value in A.bounds[axis]:
            PA, DA = _face_points(A, axis, value)
            PB, DB = _face_points(B, axis, value)
            d = PA - PB
            if A.space.kind == "torus":
                per = np.asarray(A.space.periods)
                d = d - per * np.round(d / per)
            gap = float(np.max(np.linalg.norm(d, axis=-1)))
            if gap < 1e-8:
                continue
            if _face_is_null(DA) and _face_is_null(DB):
                continue
            if _alpha_vanishes(alpha, PA) and _alpha_vanishes(alpha, PB):
                continue
            worst = max(worst, gap)
    return worst


def integrality_gap(A: SweepMap, B: SweepMap, alpha: DifferentialForm, check_boundary: bool = True) -> tuple[float, int]:
    """Distance of chain_integral(A) - chain_integral(B) to the nearest integer, and that integer."""
    if check_boundary:
        bad = boundary_mismatch(A, B, alpha)
        if bad > 0:
            raise BoundaryMismatch(f"sweeps disagree on a boundary face by {bad:.3e}")
    diff = chain_integral(A, alpha) - chain_integral(B, alpha)
    k = int(np.round(diff))
    return abs(diff - k), k


# --------------------------------------------------------------------------- sphere example


def sphere_point(theta, phi):
    """Unit sphere point at polar angle theta and azimuth phi."""
    theta = np.asarray(theta, float)
    phi = np.asarray(phi, float)
    return np.stack([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)], axis=-1)


def cap_filling(theta0: float, filling: str, resolution: int = 512) -> SweepMap:
    """Filling of the latitude circle theta = theta0 (traversed eastward) by a polar cap.

    The north filling runs from the north pole (s = 0) to the circle (s = 1);
    the south filling from the south pole.  Both have the same oriented boundary.
    """
    space = AmbientSpace.sphere()
    if filling == "north":
        f = lambda s, u: sphere_point(s * theta0, 2 * np.pi * u)
    elif filling == "south":
        f = lambda s, u: sphere_point(np.pi - s * (np.pi - theta0), 2 * np.pi * u)
    else:
        raise ValueError(f"unknown filling {filling!r}")
    return SweepMap(f, space, (resolution, resolution), name=f"{filling}_cap({theta0:g})")


@dataclass(frozen=True)
class HolonomyReport:
    value_mod_1: float
    raw_value: float
    filling_id: str
    resolution: int
    estimated_error: float

    def to_json(self) -> dict:
        return {
            "value_mod_1": self.value_mod_1,
            "raw_value": self.raw_value,
            "filling_id": self.filling_id,
            "resolution": self.resolution,
            "estimated_error": self.estimated_error,
        }


def sphere_holonomy(theta0: float, filling: str = "north", resolution: int = 512) -> HolonomyReport:
    """Cap integral of the mass-1 area form for the latitude circle at polar angle theta0.

    The error estimate is the Richardson difference against half resolution.
    """
    omega = area_form(AmbientSpace.sphere())
    raw = chain_integral(cap_filling(theta0, filling, resolution), omega)
    coarse = chain_integral(cap_filling(theta0, filling, max(MIN_RESOLUTION, resolution // 2)), omega)
    return HolonomyReport(
        value_mod_1=float(raw % 1.0),
        raw_value=raw,
        filling_id=filling,
        resolution=resolution,
        estimated_error=abs(raw - coarse) / 3.0,
    )


def _rotation_field_on_sphere(p):
    """Period-1 rotation about the z-axis: X(p) = 2 pi e_z x p."""
    return 2 * np.pi * np.cross(np.broadcast_to([0.0, 0.0, 1.0], np.shape(p)), p)


def _meridian_primitive(theta, nodes: int):
    """int_0^theta omega(X, d/dtheta) along the meridian phi = 0, by Gauss-Legendre."""
    omega = area_form(AmbientSpace.sphere())
    x, w = leggauss(nodes)
    theta = np.atleast_1d(np.asarray(theta, float))
    tt = 0.5 * theta[:, None] * (x[None, :] + 1.0)  # nodes in [0, theta]
    p = sphere_point(tt, 0.0)
    dp = np.stack([np.cos(tt), 0 * tt, -np.sin(tt)], axis=-1)
    vals = omega(p, _rotation_field_on_sphere(p), dp)
    return 0.5 * theta * np.sum(w * vals, axis=1)


def sphere_rotation_hamiltonian(theta, nodes: int = 48):
    """Zero-mean Hamilton function f with i_X omega = df for the period-1 z-rotation.

    f is integrated along a meridian from the north pole, then shifted by the
    constant that makes its integral against omega vanish.
    """
    x, w = leggauss(nodes)
    th = 0.5 * np.pi * (x + 1.0)
    F = _meridian_primitive(th, nodes)
    # int_{S^2} F omega = (1/4 pi) int int F sin(theta) dtheta dphi = (1/2) int F sin
    mean = 0.5 * 0.5 * np.pi * np.sum(w * F * np.sin(th))
    out = _meridian_primitive(theta, nodes) - mean
    return float(out[0]) if np.ndim(theta) == 0 else out


def sphere_function_integral(f: Callable, nodes: int = 64) -> float:
    """int_{S^2} f(theta) omega for an axially symmetric f."""
    x, w = leggauss(nodes)
    th = 0.5 * np.pi * (x + 1.0)
    return float(0.5 * 0.5 * np.pi * np.sum(w * np.asarray(f(th)) * np.sin(th)))


# --------------------------------------------------------------------------- loop action


def loop_action(path: Callable, primitive: DifferentialForm, resolution: tuple[int, int] = (256, 256),
                space: AmbientSpace | None = None) -> float:
    """Action of a closed path of loops ``path(t, theta)`` against a primitive 2-form.

    Integrates ``primitive(d_t path, d_theta path)`` over the swept surface with
    the midpoint rule, which is the time integral of the tilde pairing of
    ``primitive`` with the velocity section.  For a path bounding a filling
    this equals the chain integral of ``d primitive`` over the filling.
    """
    if primitive.degree != 2:
        raise DegreeMismatchError("loop_action expects a 2-form primitive")
    sweep = SweepMap(lambda t, u: path(t, u), space or primitive.space, tuple(resolution), name="loop_path")
    return chain_integral(sweep, primitive)


def bump_form(center, radius: float, space: AmbientSpace) -> DifferentialForm:
    """Smooth compactly supported 3-form of total integral 1, cohomologous to vol / vol(M).

    Density C exp(-1 / (1 - r^2 / R^2)) inside the ball of radius R.
    """
    center = np.asarray(center, float)
    radial = lambda r: 4 * np.pi * r * r * np.exp(-1.0 / (1.0 - (r / radius) ** 2))
    mass, _ = quad(radial, 0.0, radius, epsabs=1e-14, epsrel=1e-13)

    def rho(p):
        p = space.reduce(p)
        r2 = np.sum((p - center) ** 2, axis=-1) / radius ** 2
        out = np.zeros(r2.shape)
        inside = r2 < 1.0
        out[inside] = np.exp(-1.0 / (1.0 - r2[inside])) / mass
        return out

    return DifferentialForm(3, lambda p, u, v, w: rho(p) * det3(u, v, w), space, "bump")
