"""Discrete closed curves, their normal sections and the rotation J.

A loop is an ordered vertex array ``(n, 3)`` plus a lattice ``shift`` so that the
lifted vertex sequence continues as ``v[i + n] = v[i] + shift``.  On Euclidean
space the shift is zero; on the torus it lets a loop wind around a period while
keeping every edge short.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .ambient import AmbientSpace, VectorField
from .errors import DegenerateVertexError, InvalidLoopError, SpaceMismatchError

MIN_EDGE = 1e-12


class NonNormalSectionWarning(UserWarning):
    pass


@dataclass(frozen=True, eq=False)
class DiscreteLoop:
    vertices: np.ndarray
    space: AmbientSpace
    shift: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float)
        s = np.array(self.shift, dtype=float).reshape(3)
        v.setflags(write=False)
        s.setflags(write=False)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "shift", s)
        if v.ndim != 2 or v.shape[1] != 3:
            raise InvalidLoopError(f"vertices must have shape (n, 3), got {v.shape}")
        if v.shape[0] < 3:
            raise InvalidLoopError("a loop needs at least 3 vertices")
        if not np.all(np.isfinite(v)):
            raise InvalidLoopError("non-finite vertex coordinates")
        if not self.space.is_lattice(s):
            raise InvalidLoopError(f"shift {s} is not a lattice vector of {self.space}")
        lengths = self.edge_lengths
        if lengths.min() <= MIN_EDGE:
            raise InvalidLoopError(f"edge shorter than {MIN_EDGE}: {lengths.min():.3e}")
        if self.space.kind == "torus" and lengths.max() >= 0.5 * self.space.min_period:
            raise InvalidLoopError("edge longer than half the smallest torus period")

    @property
    def n(self) -> int:
        return self.vertices.shape[0]

    def __len__(self):
        return self.n

    @property
    def edges(self) -> np.ndarray:
        """e_i = v_{i+1} - v_i with the closing edge using the lattice shift."""
        v = self.vertices
        nxt = np.roll(v, -1, axis=0)
        nxt[-1] = nxt[-1] + self.shift
        return nxt - v

    @property
    def edge_lengths(self) -> np.ndarray:
        return np.linalg.norm(self.edges, axis=1)

    @property
    def midpoints(self) -> np.ndarray:
        return self.vertices + 0.5 * self.edges

    @property
    def tangents(self) -> np.ndarray:
        """Unit central-difference tangents normalize(v_{i+1} - v_{i-1})."""
        e = self.edges
        d = e + np.roll(e, 1, axis=0)
        norm = np.linalg.norm(d, axis=1)
        if norm.min() <= MIN_EDGE:
            i = int(np.argmin(norm))
            raise DegenerateVertexError(f"v[{i + 1}] == v[{i - 1}]: tangent undefined")
        return d / norm[:, None]

    @property
    def dual_lengths(self) -> np.ndarray:
        ell = self.edge_lengths
        return 0.5 * (ell + np.roll(ell, 1))

    def roll(self, k: int) -> "DiscreteLoop":
        """Cyclic relabeling: new vertex j is old vertex j + k (lifted)."""
        n = self.n
        k %= n
        idx = (np.arange(n) + k) % n
        v = self.vertices[idx].copy()
        v[n - k:] += self.shift
        return DiscreteLoop(v, self.space, self.shift)

    def reversed(self) -> "DiscreteLoop":
        return DiscreteLoop(self.vertices[::-1].copy(), self.space, -self.shift)

    def with_vertices(self, vertices) -> "DiscreteLoop":
        return DiscreteLoop(vertices, self.space, self.shift)


def loop_from_curve(curve: Callable, n: int, space: AmbientSpace, shift=None) -> DiscreteLoop:
    """Sample a closed-form curve ``curve(u)``, u in [0, 1), at n uniform parameters."""
    u = np.arange(n) / n
    return DiscreteLoop(np.asarray(curve(u), float), space, np.zeros(3) if shift is None else shift)


def circle(R: float = 1.0, n: int = 256, center=(0.0, 0.0, 0.0), space: AmbientSpace | None = None) -> DiscreteLoop:
    """Counterclockwise circle in a horizontal plane."""
    c = np.asarray(center, float)
    return loop_from_curve(
        lambda u: c + R * np.stack([np.cos(2 * np.pi * u), np.sin(2 * np.pi * u), 0 * u], axis=-1),
        n,
        space or AmbientSpace.euclidean(),
    )


def ellipse(a: float = 1.5, b: float = 1.0, n: int = 256, space: AmbientSpace | None = None) -> DiscreteLoop:
    return loop_from_curve(
        lambda u: np.stack([a * np.cos(2 * np.pi * u), b * np.sin(2 * np.pi * u), 0 * u], axis=-1),
        n,
        space or AmbientSpace.euclidean(),
    )


def trefoil(n: int = 256, scale: float = 1.0, space: AmbientSpace | None = None) -> DiscreteLoop:
    """(2, 3) torus knot on a torus of revolution with radii 2 and 1, scaled."""
    def curve(u):
        t = 2 * np.pi * u
        r = 2 + np.cos(3 * t)
        return scale * np.stack([r * np.cos(2 * t), r * np.sin(2 * t), -np.sin(3 * t)], axis=-1)

    return loop_from_curve(curve, n, space or AmbientSpace.euclidean())


def torus_loop(direction: str, offsets=(0.0, 0.0), n: int = 256, space: AmbientSpace | None = None,
               wobble: float = 0.0) -> DiscreteLoop:
    """Straight loop winding once along one torus period.

    ``offsets`` fix the two transverse coordinates; ``wobble`` adds a smooth
    transverse displacement ``wobble * (sin 2 pi u, cos 2 pi u)``.
    """
    space = space or AmbientSpace.torus()
    if space.kind != "torus":
        raise SpaceMismatchError("torus_loop needs a torus")
    axis = "xyz".index(direction)
    others = [i for i in range(3) if i != axis]
    P = space.periods[axis]

    def curve(u):
        p = np.zeros(u.shape + (3,))
        p[..., axis] = P * u
        p[..., others[0]] = offsets[0] + wobble * np.sin(2 * np.pi * u)
        p[..., others[1]] = offsets[1] + wobble * np.cos(2 * np.pi * u)
        return p

    shift = np.zeros(3)
    shift[axis] = P
    return loop_from_curve(curve, n, space, shift)


# --------------------------------------------------------------------------- loop operations


def discrete_tangent(loop: DiscreteLoop, i: int) -> np.ndarray:
    return loop.tangents[i % loop.n]


def dual_length(loop: DiscreteLoop, i: int) -> float:
    return float(loop.dual_lengths[i % loop.n])


def total_length(loop: DiscreteLoop) -> float:
    return float(np.sum(loop.edge_lengths))


def _as_section(loop: DiscreteLoop, raw) -> np.ndarray:
    raw = np.asarray(raw, dtype=float)
    if raw.shape == (3,):
        raw = np.broadcast_to(raw, (loop.n, 3))
    if raw.shape != (loop.n, 3):
        raise InvalidLoopError(f"section shape {raw.shape} does not match loop with {loop.n} vertices")
    return raw


def project_normal(loop: DiscreteLoop, raw) -> np.ndarray:
    """Remove the component along the discrete unit tangent at each vertex."""
    raw = _as_section(loop, raw)
    t = loop.tangents
    return raw - np.einsum("ij,ij->i", raw, t)[:, None] * t


def fundamental_section(X: VectorField, loop: DiscreteLoop) -> np.ndarray:
    """zeta_X(N) = X|_N, projected to the normal bundle."""
    if X.space != loop.space:
        raise SpaceMismatchError("field and loop live on different spaces")
    return project_normal(loop, X(loop.vertices))


def rotate_J(loop: DiscreteLoop, Y, tol: float = 1e-10) -> np.ndarray:
    """+90 degree rotation in the oriented normal plane: t x Y.

    Non-normal input is projected first and a :class:`NonNormalSectionWarning`
    is emitted.
    """
    Y = _as_section(loop, Y)
    t = loop.tangents
    along = np.einsum("ij,ij->i", Y, t)
    if np.max(np.abs(along), initial=0.0) > tol * max(1.0, float(np.max(np.abs(Y), initial=0.0))):
        warnings.warn("rotate_J received a non-normal section; projecting first", NonNormalSectionWarning)
        Y = Y - along[:, None] * t
    return np.cross(t, Y)


def perturb(loop: DiscreteLoop, Y, eps: float) -> DiscreteLoop:
    return loop.with_vertices(loop.vertices + eps * _as_section(loop, Y))


def random_sections(loop: DiscreteLoop, count: int, seed: int, modes: int = 3,
                    normalize: bool = True) -> list[np.ndarray]:
    """Smooth pseudo-random normal sections.

    Each raw section is a trigonometric polynomial of degree ``modes`` in the
    vertex parameter u = i / n with N(0, 1) vector coefficients, then projected
    and (by default) scaled to unit root-mean-square magnitude along the loop.
    Sampling the same seed on refined loops gives the same continuum section.
    """
    rng = np.random.default_rng(seed)
    u = np.arange(loop.n) / loop.n
    out = []
    for _ in range(count):
        coef = rng.normal(size=(2 * modes + 1, 3))
        raw = np.tile(coef[0], (loop.n, 1))
        for m in range(1, modes + 1):
            w = 1.0 / m
            raw = raw + w * (np.cos(2 * np.pi * m * u)[:, None] * coef[2 * m - 1]
                             + np.sin(2 * np.pi * m * u)[:, None] * coef[2 * m])
        Y = project_normal(loop, raw)
        if normalize:
            w = loop.dual_lengths
            Y = Y / np.sqrt(np.sum(np.einsum("ij,ij->i", Y, Y) * w) / np.sum(w))
        out.append(Y)
    return out
