"""Moment maps, Lie algebra cocycles and group cocycles for exact divergence-free fields.

Every Lie algebra element is a :class:`~grassflow.ambient.VectorField` carrying a
potential ``A`` with ``dA = i_X vol``; fields without one are rejected.

Two brackets appear.  ``lie_bracket`` is the vector-field bracket
``(DY)X - (DX)Y``.  The Lie algebra of the diffeomorphism group uses its
negative, :func:`algebra_bracket`; the moment-map formula for the cocycle is
stated in terms of the latter.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .ambient import AmbientSpace, Diffeo, VectorField, det3, lie_bracket, one_form, volume
from .errors import MissingPotentialError, ResolutionError, SpaceMismatchError
from .filament import fd_derivative
from .loops import DiscreteLoop, fundamental_section, random_sections
from .tilde import mw_symplectic, tilde_function


def require_exact(X: VectorField) -> VectorField:
    if X.potential is None:
        raise MissingPotentialError(f"field {X.name!r} has no certified potential")
    return X


def _same_space(*objs):
    spaces = {o.space for o in objs}
    if len(spaces) != 1:
        raise SpaceMismatchError("objects live on different spaces")


def algebra_bracket(X: VectorField, Y: VectorField) -> VectorField:
    """Lie algebra bracket of the group: minus the vector-field bracket."""
    return -lie_bracket(X, Y)


def line_integral(X: VectorField, loop: DiscreteLoop) -> float:
    """Integral of the potential 1-form of X over the loop."""
    require_exact(X)
    return tilde_function(one_form(X.potential), loop)


def moment(loop: DiscreteLoop, X: VectorField, base: DiscreteLoop) -> float:
    """mu(N)(X) = int_N A - int_{N0} A."""
    _same_space(loop, base, X)
    return line_integral(X, loop) - line_integral(X, base)


def hamiltonian_residual(loop: DiscreteLoop, X: VectorField, base: DiscreteLoop | None = None,
                         trials: int = 8, seed: int = 0, sections: Sequence[np.ndarray] | None = None) -> float:
    """max |d mu(.)(X) (Y) - Omega(zeta_X, Y)| over normal sections Y."""
    require_exact(X)
    base = loop if base is None else base
    zeta = fundamental_section(X, loop)
    secs = random_sections(loop, trials, seed) if sections is None else sections
    worst = 0.0
    for Y in secs:
        fd = fd_derivative(lambda N: moment(N, X, base), loop, Y)
        worst = max(worst, abs(fd - mw_symplectic(loop, zeta, Y)))
    return worst


def cocycle_c(base: DiscreteLoop, X: VectorField, Y: VectorField) -> float:
    """c(X, Y) = -int_{N0} vol(X, Y, t) using full (unprojected) field values."""
    require_exact(X)
    require_exact(Y)
    _same_space(base, X, Y)
    v = base.vertices
    return 0.0 - float(np.sum(det3(X(v), Y(v), base.tangents) * base.dual_lengths))


def cocycle_identity_residual(base: DiscreteLoop, X: VectorField, Y: VectorField, Z: VectorField) -> float:
    """|c([X,Y],Z) + c([Y,Z],X) + c([Z,X],Y)| with bracket potentials."""
    total = (
        cocycle_c(base, lie_bracket(X, Y), Z)
        + cocycle_c(base, lie_bracket(Y, Z), X)
        + cocycle_c(base, lie_bracket(Z, X), Y)
    )
    return abs(total)


@dataclass(frozen=True)
class Constancy:
    spread: float
    values: tuple[float, ...]


def cocycle_formula_constancy(base: DiscreteLoop, X: VectorField, Y: VectorField,
                              probes: Iterable[DiscreteLoop]) -> Constancy:
    """Spread over probes N of h_[X,Y](N) - Omega(zeta_X, zeta_Y)(N).

    ``h`` is the moment map based at ``base`` and the bracket is the group's
    Lie algebra bracket; the value is independent of N and equals c(X, Y).
    """
    B = algebra_bracket(X, Y)
    values = []
    for N in probes:
        h = moment(N, B, base)
        values.append(h - mw_symplectic(N, fundamental_section(X, N), fundamental_section(Y, N)))
    return Constancy(max(values) - min(values), tuple(values))


def image_loop(phi: Diffeo, loop: DiscreteLoop) -> DiscreteLoop:
    """Vertex-wise image; the lattice shift is transported with the first vertex."""
    v0 = loop.vertices[0]
    shift = phi(v0 + loop.shift) - phi(v0)
    if loop.space.kind == "torus":
        per = np.asarray(loop.space.periods)
        shift = np.round(shift / per) * per
    return DiscreteLoop(phi(loop.vertices), loop.space, shift)


def kappa(phi: Diffeo, X: VectorField, base: DiscreteLoop) -> float:
    """kappa(phi)(X) = int_{phi(N0)} A - int_{N0} A."""
    _same_space(phi, X, base)
    return line_integral(X, image_loop(phi, base)) - line_integral(X, base)


# --------------------------------------------------------------------------- bordisms


@dataclass(frozen=True)
class Bordism:
    """Closed-form surface ``surface(u, v)`` with u in [0, 1] and v in [0, 1) periodic.

    ``u = 0`` traces the incoming loop and ``u = 1`` the outgoing one, so the
    oriented boundary is N' - N.
    """

    surface: Callable
    space: AmbientSpace
    grid: tuple[int, int] = (128, 128)

    def __post_init__(self):
        if min(self.grid) < 2:
            raise ResolutionError("bordism grid must be at least 2 x 2")

    def __call__(self, u, v):
        return np.asarray(self.surface(np.asarray(u, float), np.asarray(v, float)), float)

    def boundary_error(self, incoming: DiscreteLoop, outgoing: DiscreteLoop) -> float:
        """Max distance (mod lattice) between boundary traces and loop vertices."""
        worst = 0.0
        for u, loop in ((0.0, incoming), (1.0, outgoing)):
            v = np.arange(loop.n) / loop.n
            d = self(np.full_like(v, u), v) - loop.vertices
            if self.space.kind == "torus":
                per = np.asarray(self.space.periods)
                d = d - per * np.round(d / per)
            worst = max(worst, float(np.max(np.linalg.norm(d, axis=1))))
        return worst


def straight_bordism(curve0: Callable, curve1: Callable, space: AmbientSpace, grid=(128, 128)) -> Bordism:
    """(1 - u) curve0(v) + u curve1(v)."""
    def surface(u, v):
        return (1 - u)[..., None] * curve0(v) + u[..., None] * curve1(v)

    return Bordism(surface, space, grid)


def lambda0(B: Bordism, X: VectorField) -> float:
    """lambda_0(X) = -int_B i_X vol by the midpoint rule on the (u, v) grid."""
    require_exact(X)
    if B.space != X.space:
        raise SpaceMismatchError("bordism and field live on different spaces")
    nu, nv = B.grid
    du, dv = 1.0 / nu, 1.0 / nv
    u = (np.arange(nu) + 0.5) * du
    v = (np.arange(nv) + 0.5) * dv
    U, V = np.meshgrid(u, v, indexing="ij")
    P = B(U, V)
    Su = (B(U + 0.5 * du, V) - B(U - 0.5 * du, V)) / du
    Sv = (B(U, V + 0.5 * dv) - B(U, V - 0.5 * dv)) / dv
    return -float(np.sum(det3(X(P), Su, Sv)) * du * dv)


def iso_check(base: DiscreteLoop, base2: DiscreteLoop, B: Bordism, X: VectorField, Y: VectorField) -> float:
    """|c'(X,Y) - c(X,Y) - lambda_0(-[X,Y])| with the vector-field bracket."""
    lhs = cocycle_c(base2, X, Y) - cocycle_c(base, X, Y)
    return abs(lhs - lambda0(B, -lie_bracket(X, Y)))


def cocycle_table(base: DiscreteLoop, catalog: Mapping[str, VectorField]) -> list[tuple[str, str, float]]:
    """c(X_i, X_j) over all ordered pairs of a named field catalog (sorted names)."""
    names = sorted(catalog)
    return [(a, b, cocycle_c(base, catalog[a], catalog[b])) for a in names for b in names]
