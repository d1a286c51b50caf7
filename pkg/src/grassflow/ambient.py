"""Ambient manifolds, differential forms, analytic vector fields and closed-form diffeomorphisms.

Points and vectors are numpy arrays whose last axis has length 3; every callable
here broadcasts over the leading axes.  Torus points are stored as unconstrained
lifts and reduced modulo the periods only when a field is evaluated.

Conventions
-----------
* ``jacobian(p)[..., i, j] = dX_i / dx_j``.
* ``hessian(p)[..., i, j, k] = d^2 X_i / dx_j dx_k``.
* ``lie_bracket(X, Y) = (DY) X - (DX) Y``, so that ``[X, Y] f = X(Y f) - Y(X f)``.
* A potential is stored as the metric-dual vector field ``A`` of the 1-form with
  ``dA = i_X vol``; in three dimensions this is ``curl A = X``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .errors import (
    DegreeMismatchError,
    MissingDataError,
    NonFiniteError,
    SpaceMismatchError,
)

FD_STEP = 1e-6


# --------------------------------------------------------------------------- spaces


@dataclass(frozen=True)
class AmbientSpace:
    kind: str
    periods: tuple[float, float, float] | None = None

    def __post_init__(self):
        if self.kind not in ("euclidean", "torus", "sphere"):
            raise ValueError(f"unknown ambient kind {self.kind!r}")
        if self.kind == "torus":
            if self.periods is None or len(self.periods) != 3 or min(self.periods) <= 0:
                raise ValueError("torus periods must be three positive numbers")
            object.__setattr__(self, "periods", tuple(float(p) for p in self.periods))

    @classmethod
    def euclidean(cls) -> "AmbientSpace":
        return cls("euclidean")

    @classmethod
    def torus(cls, periods: Sequence[float] = (1.0, 1.0, 1.0)) -> "AmbientSpace":
        return cls("torus", tuple(periods))

    @classmethod
    def sphere(cls) -> "AmbientSpace":
        """Unit sphere in R^3 carrying the area form of total mass 1."""
        return cls("sphere")

    @property
    def dim(self) -> int:
        return 2 if self.kind == "sphere" else 3

    @property
    def total_volume(self) -> float:
        if self.kind == "torus":
            p1, p2, p3 = self.periods
            return p1 * p2 * p3
        if self.kind == "sphere":
            return 1.0
        return float("inf")

    @property
    def min_period(self) -> float:
        return min(self.periods) if self.kind == "torus" else float("inf")

    def reduce(self, p):
        """Representative of ``p`` in the fundamental domain (identity off the torus)."""
        p = np.asarray(p, dtype=float)
        if self.kind != "torus":
            return p
        per = np.asarray(self.periods)
        return p - per * np.floor(p / per)

    def is_lattice(self, v, tol: float = 1e-9) -> bool:
        v = np.asarray(v, dtype=float)
        if self.kind != "torus":
            return bool(np.all(np.abs(v) <= tol))
        per = np.asarray(self.periods)
        k = v / per
        return bool(np.all(np.abs(k - np.round(k)) * per <= tol))


def _require_same(a: AmbientSpace, b: AmbientSpace):
    if a != b:
        raise SpaceMismatchError(f"objects live on different spaces: {a} vs {b}")


# --------------------------------------------------------------------------- linear algebra helpers


def det3(u, v, w):
    """Oriented determinant ``(u x v) . w`` with broadcasting.

    Evaluated in this order so that swapping the first two arguments flips the
    sign exactly and equal first arguments give exactly zero.
    """
    return np.einsum("...i,...i->...", np.cross(u, v), np.asarray(w, float))


def fd_jacobian(f: Callable, p, h: float = FD_STEP):
    """Central-difference Jacobian of a point map ``f``; result[..., i, j] = df_i/dx_j."""
    p = np.asarray(p, dtype=float)
    cols = []
    for j in range(3):
        e = np.zeros(3)
        e[j] = h
        cols.append((np.asarray(f(p + e)) - np.asarray(f(p - e))) / (2 * h))
    return np.stack(cols, axis=-1)


# --------------------------------------------------------------------------- differential forms


@dataclass(frozen=True)
class DifferentialForm:
    """A closed-form alternating multilinear map evaluated pointwise.

    ``evaluator(p, *vectors)`` must accept exactly ``degree`` vector arguments.
    """

    degree: int
    evaluator: Callable
    space: AmbientSpace
    name: str = ""

    def __post_init__(self):
        if not 0 <= self.degree <= 3:
            raise DegreeMismatchError(f"degree {self.degree} outside 0..3")

    def __call__(self, p, *vectors):
        if len(vectors) != self.degree:
            raise DegreeMismatchError(
                f"{self.degree}-form evaluated on {len(vectors)} vectors"
            )
        return np.asarray(self.evaluator(np.asarray(p, float), *vectors), dtype=float)


def volume(space: AmbientSpace) -> DifferentialForm:
    """The standard volume form of a three-dimensional space."""
    if space.dim != 3:
        raise DegreeMismatchError(f"{space.kind} has no volume 3-form")
    return DifferentialForm(3, lambda p, u, v, w: det3(u, v, w), space, "vol")


def volume_form(space: AmbientSpace, v1, v2, v3, at=None):
    """vol(v1, v2, v3); constant coefficients, so ``at`` only fixes broadcasting."""
    form = volume(space)
    p = np.zeros(3) if at is None else at
    return form(p, v1, v2, v3)


def area_form(space: AmbientSpace) -> DifferentialForm:
    """Rotation-invariant area form of the unit sphere normalised to total mass 1."""
    if space.kind != "sphere":
        raise DegreeMismatchError("area_form is defined on the sphere only")

    def ev(p, u, v):
        return det3(p, u, v) / (4 * np.pi)

    return DifferentialForm(2, ev, space, "omega")


def one_form(dual: "VectorField | Callable", space: AmbientSpace | None = None, name="") -> DifferentialForm:
    """1-form ``v -> A(p) . v`` from its metric dual."""
    if isinstance(dual, VectorField):
        space = dual.space
    if space is None:
        raise ValueError("space required for a plain callable")
    return DifferentialForm(1, lambda p, v: np.einsum("...i,...i->...", dual(p), v), space, name)


def flux_form(B: "VectorField | Callable", space: AmbientSpace | None = None, name="") -> DifferentialForm:
    """2-form ``(u, v) -> B(p) . (u x v)``, i.e. ``i_B vol``."""
    if isinstance(B, VectorField):
        space = B.space
    if space is None:
        raise ValueError("space required for a plain callable")
    return DifferentialForm(
        2, lambda p, u, v: np.einsum("...i,...i->...", B(p), np.cross(u, v)), space, name
    )


def density_form(rho: Callable, space: AmbientSpace, name="") -> DifferentialForm:
    """3-form ``rho(p) vol``."""
    if space.dim != 3:
        raise DegreeMismatchError("density_form needs a 3-dimensional space")
    return DifferentialForm(
        3, lambda p, u, v, w: rho(space.reduce(p)) * det3(u, v, w), space, name
    )


def interior(X: "VectorField", form: DifferentialForm) -> DifferentialForm:
    """i_X form."""
    _require_same(X.space, form.space)
    if form.degree == 0:
        raise DegreeMismatchError("cannot contract a 0-form")
    return DifferentialForm(
        form.degree - 1,
        lambda p, *vs: form(p, X(p), *vs),
        form.space,
        f"i_{X.name or 'X'}{form.name}",
    )


def pullback(phi: "Diffeo", form: DifferentialForm) -> DifferentialForm:
    """phi^* form, using the closed-form tangent map."""
    _require_same(phi.space, form.space)

    def ev(p, *vs):
        T = phi.T(p)
        return form(phi(p), *(np.einsum("...ij,...j->...i", T, v) for v in vs))

    return DifferentialForm(form.degree, ev, form.space, f"{phi.name}^*{form.name}")


# --------------------------------------------------------------------------- vector fields


@dataclass(frozen=True)
class VectorField:
    """Closed-form vector field with analytic Jacobian.

    ``potential`` (optional) is the metric dual of a 1-form ``A`` with
    ``dA = i_X vol``; its presence certifies exact divergence-freeness.
    """

    space: AmbientSpace
    value: Callable
    jacobian: Callable | None = None
    hessian: Callable | None = None
    potential: "VectorField | None" = None
    name: str = ""

    def __call__(self, p):
        out = np.asarray(self.value(self.space.reduce(p)), dtype=float)
        return np.broadcast_to(out, np.shape(p)[:-1] + (3,)) if out.shape != np.shape(p) else out

    def jac(self, p):
        p = self.space.reduce(p)
        if self.jacobian is None:
            return fd_jacobian(self.value, p)
        out = np.asarray(self.jacobian(p), dtype=float)
        return np.broadcast_to(out, np.shape(p)[:-1] + (3, 3))

    def hess(self, p):
        if self.hessian is None:
            raise MissingDataError(f"field {self.name!r} has no closed-form hessian")
        p = self.space.reduce(p)
        out = np.asarray(self.hessian(p), dtype=float)
        return np.broadcast_to(out, np.shape(p)[:-1] + (3, 3, 3))

    def divergence(self, p):
        return np.trace(self.jac(p), axis1=-2, axis2=-1)

    @property
    def is_exact(self) -> bool:
        return self.potential is not None

    def scaled(self, c: float) -> "VectorField":
        return linear_combination([(c, self)], name=f"{c:g}*{self.name}")

    def __neg__(self):
        return self.scaled(-1.0)

    def __add__(self, other: "VectorField"):
        return linear_combination([(1.0, self), (1.0, other)], name=f"{self.name}+{other.name}")

    def __sub__(self, other: "VectorField"):
        return linear_combination([(1.0, self), (-1.0, other)], name=f"{self.name}-{other.name}")


def curl_of(F: VectorField, p):
    J = F.jac(p)
    return np.stack(
        [J[..., 2, 1] - J[..., 1, 2], J[..., 0, 2] - J[..., 2, 0], J[..., 1, 0] - J[..., 0, 1]],
        axis=-1,
    )


def linear_combination(terms: Sequence[tuple[float, VectorField]], name: str = "") -> VectorField:
    space = terms[0][1].space
    for _, f in terms:
        _require_same(space, f.space)

    def value(p):
        return sum(c * np.asarray(f.value(p), float) for c, f in terms)

    def jac(p):
        return sum(c * f.jac(p) for c, f in terms)

    hess = None
    if all(f.hessian is not None for _, f in terms):
        def hess(p):
            return sum(c * f.hess(p) for c, f in terms)

    pot = None
    if all(f.potential is not None for _, f in terms):
        pot = linear_combination([(c, f.potential) for c, f in terms])
    return VectorField(space, value, jac, hess, pot, name)


def constant_field(v, space: AmbientSpace, name: str = "") -> VectorField:
    v = np.asarray(v, dtype=float)
    zero3 = np.zeros((3, 3))
    zero33 = np.zeros((3, 3, 3))
    return VectorField(
        space,
        lambda p: np.broadcast_to(v, np.shape(p)),
        lambda p: np.broadcast_to(zero3, np.shape(p)[:-1] + (3, 3)),
        lambda p: np.broadcast_to(zero33, np.shape(p)[:-1] + (3, 3, 3)),
        None,
        name or f"const{tuple(v)}",
    )


def linear_field(M, space: AmbientSpace, offset=None, name: str = "") -> VectorField:
    """X(p) = M p + offset."""
    M = np.asarray(M, dtype=float)
    b = np.zeros(3) if offset is None else np.asarray(offset, float)
    zero33 = np.zeros((3, 3, 3))
    return VectorField(
        space,
        lambda p: np.einsum("ij,...j->...i", M, p) + b,
        lambda p: np.broadcast_to(M, np.shape(p)[:-1] + (3, 3)),
        lambda p: np.broadcast_to(zero33, np.shape(p)[:-1] + (3, 3, 3)),
        None,
        name,
    )


def rotation_field(omega: float = 1.0, space: AmbientSpace | None = None) -> VectorField:
    """Rigid rotation about the z-axis with angular speed ``omega``.

    Carries the potential ``-(omega/2)(x^2 + y^2) e_z`` (curl gives the rotation).
    """
    space = space or AmbientSpace.euclidean()
    M = omega * np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
    X = linear_field(M, space, name="rot_z")

    def pot_value(p):
        r2 = p[..., 0] ** 2 + p[..., 1] ** 2
        out = np.zeros(np.shape(p))
        out[..., 2] = -0.5 * omega * r2
        return out

    def pot_jac(p):
        out = np.zeros(np.shape(p)[:-1] + (3, 3))
        out[..., 2, 0] = -omega * p[..., 0]
        out[..., 2, 1] = -omega * p[..., 1]
        return out

    return replace(X, potential=VectorField(space, pot_value, pot_jac, name="A_rot_z"))


@dataclass(frozen=True)
class FourierMode:
    """One potential mode ``A(p) = amplitude * sin(2 pi k . (p / periods) + phase)``."""

    amplitude: tuple[float, float, float]
    wavevector: tuple[int, int, int]
    phase: float = 0.0


def fourier_field(modes: Sequence[FourierMode], space: AmbientSpace, name: str = "") -> VectorField:
    """Exact divergence-free field ``curl A`` for a trigonometric potential ``A``.

    Each mode contributes ``X = c cos(theta) (q x a)`` with ``q = 2 pi k / periods``.
    Hessians are closed-form, so brackets of these fields have analytic Jacobians.
    """
    if space.dim != 3:
        raise DegreeMismatchError("fourier_field needs a 3-dimensional space")
    per = np.asarray(space.periods if space.kind == "torus" else (1.0, 1.0, 1.0))
    A = np.array([m.amplitude for m in modes], dtype=float)  # (M, 3)
    Q = 2 * np.pi * np.array([m.wavevector for m in modes], dtype=float) / per  # (M, 3)
    ph = np.array([m.phase for m in modes], dtype=float)
    C = np.cross(Q, A)  # curl direction per mode

    def theta(p):
        return np.einsum("...j,mj->...m", p, Q) + ph

    def value(p):
        return np.einsum("...m,mi->...i", np.cos(theta(p)), C)

    def jac(p):
        return -np.einsum("...m,mi,mj->...ij", np.sin(theta(p)), C, Q)

    def hess(p):
        return -np.einsum("...m,mi,mj,mk->...ijk", np.cos(theta(p)), C, Q, Q)

    def pot_value(p):
        return np.einsum("...m,mi->...i", np.sin(theta(p)), A)

    def pot_jac(p):
        return np.einsum("...m,mi,mj->...ij", np.cos(theta(p)), A, Q)

    pot = VectorField(space, pot_value, pot_jac, name=f"A_{name}")
    return VectorField(space, value, jac, hess, pot, name)


def lie_bracket(X: VectorField, Y: VectorField) -> VectorField:
    """[X, Y] = (DY) X - (DX) Y.

    The Jacobian is analytic when both inputs carry hessians, otherwise central
    differences.  When both carry potentials the bracket gets the potential
    ``i_X i_Y vol``, whose metric dual is ``Y x X``.
    """
    _require_same(X.space, Y.space)

    def value(p):
        return np.einsum("...ij,...j->...i", Y.jac(p), X.value(p)) - np.einsum(
            "...ij,...j->...i", X.jac(p), Y.value(p)
        )

    jac = None
    if X.hessian is not None and Y.hessian is not None:
        def jac(p):
            x, y = X.value(p), Y.value(p)
            DX, DY = X.jac(p), Y.jac(p)
            return (
                np.einsum("...ikj,...k->...ij", Y.hess(p), x)
                + DY @ DX
                - np.einsum("...ikj,...k->...ij", X.hess(p), y)
                - DX @ DY
            )

    pot = None
    if X.potential is not None and Y.potential is not None:
        def pot_value(p):
            return np.cross(Y.value(p), X.value(p))

        def pot_jac(p):
            x, y = X.value(p), Y.value(p)
            DX, DY = X.jac(p), Y.jac(p)
            # column j: (d_j Y) x X + Y x (d_j X)
            return np.cross(np.swapaxes(DY, -1, -2), x[..., None, :]).swapaxes(-1, -2) + np.cross(
                y[..., None, :], np.swapaxes(DX, -1, -2)
            ).swapaxes(-1, -2)

        pot = VectorField(X.space, pot_value, pot_jac, name=f"A[{X.name},{Y.name}]")
    return VectorField(X.space, value, jac, None, pot, f"[{X.name},{Y.name}]")


def flow_point(X: VectorField, t: float, p, steps: int, reduce: bool = False):
    """Fixed-step classical RK4 integration of dp/dt = X(p) over time ``t``."""
    if steps < 1:
        raise ValueError("steps must be >= 1")
    h = t / steps
    p = np.array(p, dtype=float)
    for _ in range(steps):
        k1 = X(p)
        k2 = X(p + 0.5 * h * k1)
        k3 = X(p + 0.5 * h * k2)
        k4 = X(p + h * k3)
        p = p + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(p)):
            raise NonFiniteError("flow produced a non-finite state")
    return X.space.reduce(p) if reduce else p


# --------------------------------------------------------------------------- diffeomorphisms


@dataclass(frozen=True)
class Diffeo:
    """Closed-form diffeomorphism of an ambient space.

    ``tangent_derivative(p)[..., i, j, k] = d T_ij / d x_k``; optional, central
    differences of ``tangent`` are used when absent.
    """

    space: AmbientSpace
    forward: Callable
    inverse: Callable | None = None
    tangent: Callable | None = None
    tangent_derivative: Callable | None = None
    volume_preserving: bool = False
    name: str = "phi"

    def __call__(self, p):
        return np.asarray(self.forward(np.asarray(p, float)), dtype=float)

    def inv(self, p):
        if self.inverse is None:
            raise MissingDataError(f"diffeo {self.name!r} has no inverse")
        return np.asarray(self.inverse(np.asarray(p, float)), dtype=float)

    def T(self, p):
        if self.tangent is None:
            raise MissingDataError(f"diffeo {self.name!r} has no tangent map")
        p = np.asarray(p, float)
        return np.broadcast_to(np.asarray(self.tangent(p), float), p.shape[:-1] + (3, 3))

    def dT(self, p):
        p = np.asarray(p, float)
        if self.tangent_derivative is None:
            return fd_jacobian(lambda q: self.T(q), p)
        return np.broadcast_to(
            np.asarray(self.tangent_derivative(p), float), p.shape[:-1] + (3, 3, 3)
        )


def identity_diffeo(space: AmbientSpace) -> Diffeo:
    eye = np.eye(3)
    zero = np.zeros((3, 3, 3))
    return Diffeo(
        space,
        lambda p: np.array(p, float),
        lambda p: np.array(p, float),
        lambda p: np.broadcast_to(eye, np.shape(p)[:-1] + (3, 3)),
        lambda p: np.broadcast_to(zero, np.shape(p)[:-1] + (3, 3, 3)),
        True,
        "id",
    )


def translation(c, space: AmbientSpace) -> Diffeo:
    c = np.asarray(c, dtype=float)
    ident = identity_diffeo(space)
    return replace(ident, forward=lambda p: p + c, inverse=lambda p: p - c, name=f"trans{tuple(c)}")


def rotation_z(angle: float, space: AmbientSpace | None = None) -> Diffeo:
    space = space or AmbientSpace.euclidean()
    c, s = np.cos(angle), np.sin(angle)
    R = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    zero = np.zeros((3, 3, 3))
    return Diffeo(
        space,
        lambda p: np.einsum("ij,...j->...i", R, p),
        lambda p: np.einsum("ji,...j->...i", R, p),
        lambda p: np.broadcast_to(R, np.shape(p)[:-1] + (3, 3)),
        lambda p: np.broadcast_to(zero, np.shape(p)[:-1] + (3, 3, 3)),
        True,
        f"rot_z({angle:g})",
    )


def shear(f: Callable, g: Callable | None = None, space: AmbientSpace | None = None, name: str = "shear") -> Diffeo:
    """(x, y, z) -> (x, y + f(x), z + g(x, y)); volume preserving.

    ``f(x)`` returns ``(f, f', f'')`` and ``g(x, y)`` returns
    ``(g, g_x, g_y, g_xx, g_xy, g_yy)``.
    """
    space = space or AmbientSpace.euclidean()

    def _g(x, y):
        if g is None:
            z = np.zeros_like(x)
            return z, z, z, z, z, z
        return g(x, y)

    def forward(p):
        x, y, z = p[..., 0], p[..., 1], p[..., 2]
        fx = f(x)[0]
        y2 = y + fx
        return np.stack([x, y2, z + _g(x, y)[0]], axis=-1)

    def inverse(p):
        x, y, z = p[..., 0], p[..., 1], p[..., 2]
        y0 = y - f(x)[0]
        return np.stack([x, y0, z - _g(x, y0)[0]], axis=-1)

    def tangent(p):
        x, y = p[..., 0], p[..., 1]
        _, f1, _ = f(x)
        _, gx, gy, *_ = _g(x, y)
        T = np.zeros(np.shape(p)[:-1] + (3, 3))
        T[..., 0, 0] = T[..., 1, 1] = T[..., 2, 2] = 1.0
        T[..., 1, 0] = f1
        T[..., 2, 0] = gx
        T[..., 2, 1] = gy
        return T

    def tangent_derivative(p):
        x, y = p[..., 0], p[..., 1]
        _, _, f2 = f(x)
        _, _, _, gxx, gxy, gyy = _g(x, y)
        D = np.zeros(np.shape(p)[:-1] + (3, 3, 3))
        D[..., 1, 0, 0] = f2
        D[..., 2, 0, 0] = gxx
        D[..., 2, 0, 1] = gxy
        D[..., 2, 1, 0] = gxy
        D[..., 2, 1, 1] = gyy
        return D

    return Diffeo(space, forward, inverse, tangent, tangent_derivative, True, name)


def trig_shear(a: float, b: float = 0.0, space: AmbientSpace | None = None) -> Diffeo:
    """Shear with f(x) = a sin(2 pi x), g(x, y) = b sin(2 pi (x + y)); periodic on the unit torus."""
    w = 2 * np.pi

    def f(x):
        return a * np.sin(w * x), a * w * np.cos(w * x), -a * w * w * np.sin(w * x)

    def g(x, y):
        s, c = np.sin(w * (x + y)), np.cos(w * (x + y))
        return b * s, b * w * c, b * w * c, -b * w * w * s, -b * w * w * s, -b * w * w * s

    return shear(f, g, space or AmbientSpace.torus(), name=f"shear({a:g},{b:g})")


def compose(phi: Diffeo, psi: Diffeo) -> Diffeo:
    """phi o psi."""
    _require_same(phi.space, psi.space)

    inverse = None
    if phi.inverse is not None and psi.inverse is not None:
        def inverse(p):
            return psi.inv(phi.inv(p))

    tangent = derivative = None
    if phi.tangent is not None and psi.tangent is not None:
        def tangent(p):
            return phi.T(psi(p)) @ psi.T(p)

        def derivative(p):
            q = psi(p)
            Tp = psi.T(p)
            return np.einsum("...ajl,...lk,...jb->...abk", phi.dT(q), Tp, Tp) + np.einsum(
                "...aj,...jbk->...abk", phi.T(q), psi.dT(p)
            )

    return Diffeo(
        phi.space,
        lambda p: phi(psi(p)),
        inverse,
        tangent,
        derivative,
        phi.volume_preserving and psi.volume_preserving,
        f"{phi.name}o{psi.name}",
    )


def inverse_diffeo(phi: Diffeo) -> Diffeo:
    if phi.inverse is None or phi.tangent is None:
        raise MissingDataError(f"diffeo {phi.name!r} lacks inverse or tangent data")

    def tangent(p):
        return np.linalg.inv(phi.T(phi.inv(p)))

    def derivative(p):
        q = phi.inv(p)
        Ti = np.linalg.inv(phi.T(q))
        # d(T^-1)/dp_k = -T^-1 (dT/dq_l) T^-1 (dq_l/dp_k)
        return -np.einsum("...ia,...abl,...bj,...lk->...ijk", Ti, phi.dT(q), Ti, Ti)

    return Diffeo(phi.space, phi.inverse, phi.forward, tangent, derivative, phi.volume_preserving, f"{phi.name}^-1")


def pushforward_field(phi: Diffeo, X: VectorField) -> VectorField:
    """phi_* X = T phi o X o phi^-1, Jacobian by the chain rule.

    For volume-preserving ``phi`` a potential of ``X`` is transported as
    ``(phi^-1)^* A``, whose metric dual is ``T(q)^{-T} A(q)``.
    """
    _require_same(phi.space, X.space)
    if phi.inverse is None or phi.tangent is None:
        raise MissingDataError(f"diffeo {phi.name!r} lacks inverse or tangent data")

    def value(p):
        q = phi.inv(p)
        return np.einsum("...ij,...j->...i", phi.T(q), X(q))

    def jac(p):
        q = phi.inv(p)
        T = phi.T(q)
        inner = np.einsum("...ilk,...l->...ik", phi.dT(q), X(q)) + T @ X.jac(q)
        return inner @ np.linalg.inv(T)

    pot = None
    if phi.volume_preserving and X.potential is not None:
        A = X.potential

        def pot_value(p):
            q = phi.inv(p)
            Ti = np.linalg.inv(phi.T(q))
            return np.einsum("...li,...l->...i", Ti, A(q))

        def pot_jac(p):
            q = phi.inv(p)
            Ti = np.linalg.inv(phi.T(q))
            dTi = -np.einsum("...la,...abk,...bi->...lik", Ti, phi.dT(q), Ti)
            dq = np.einsum("...lik,...l->...ik", dTi, A(q)) + np.einsum(
                "...li,...lk->...ik", Ti, A.jac(q)
            )
            return dq @ Ti

        pot = VectorField(X.space, pot_value, pot_jac, name=f"{phi.name}_*A")
    return VectorField(X.space, value, jac, None, pot, f"{phi.name}_*{X.name}")


def pullback_field(phi: Diffeo, X: VectorField) -> VectorField:
    """phi^* X = (phi^-1)_* X; its potential is phi^* A."""
    return pushforward_field(inverse_diffeo(phi), X)


# --------------------------------------------------------------------------- sampled invariant checks


def sample_points(space: AmbientSpace, count: int, seed: int, scale: float = 1.0):
    rng = np.random.default_rng(seed)
    if space.kind == "torus":
        return rng.uniform(0.0, 1.0, (count, 3)) * np.asarray(space.periods)
    if space.kind == "sphere":
        v = rng.normal(size=(count, 3))
        return v / np.linalg.norm(v, axis=-1, keepdims=True)
    return rng.uniform(-scale, scale, (count, 3))


def jacobian_error(X: VectorField, points) -> float:
    return float(np.max(np.abs(X.jac(points) - fd_jacobian(X, points))))


def divergence_error(X: VectorField, points) -> float:
    return float(np.max(np.abs(X.divergence(points))))


def curl_consistency_error(X: VectorField, points) -> float:
    if X.potential is None:
        raise MissingDataError(f"field {X.name!r} has no potential")
    return float(np.max(np.abs(X(points) - curl_of(X.potential, points))))


def inverse_error(phi: Diffeo, points) -> float:
    return float(np.max(np.abs(phi(phi.inv(points)) - points)))


def volume_preservation_error(phi: Diffeo, points) -> float:
    return float(np.max(np.abs(np.linalg.det(phi.T(points)) - 1.0)))
