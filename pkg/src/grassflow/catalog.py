"""Named loop generators, exact field potentials and diffeomorphism families.

Everything the scenario runner can refer to by name lives here.  Each entry
carries a one-line parameter description for ``grassflow list``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import loops
from .ambient import (
    AmbientSpace,
    FourierMode,
    VectorField,
    fourier_field,
    rotation_z,
    translation,
    trig_shear,
)


@dataclass(frozen=True)
class Entry:
    kind: str
    name: str
    params: str
    build: Callable


def _mode(a, k, phase=0.0):
    return FourierMode(np.asarray(a, float), np.asarray(k, float), phase)


def random_trig_field(seed: int, space: AmbientSpace, count: int = 3, scale: float = 0.15) -> VectorField:
    """Sum of ``count`` Fourier modes with integer wavevectors in {-1, 0, 1}^3."""
    rng = np.random.default_rng(seed)
    modes = []
    while len(modes) < count:
        k = rng.integers(-1, 2, size=3)
        if not k.any():
            continue
        modes.append(_mode(scale * rng.normal(size=3), k, rng.uniform(0, 2 * np.pi)))
    return fourier_field(modes, space, f"r{seed}")


def abc_field(space: AmbientSpace, A: float = 1.0, B: float = 1.0, C: float = 1.0) -> VectorField:
    """Arnold-Beltrami-Childress field on the unit torus; curl X = 2 pi X so A-dual = X / 2 pi."""
    w = 1.0 / (2 * np.pi)
    h = np.pi / 2
    modes = [
        _mode([A * w, 0, 0], [0, 0, 1]), _mode([C * w, 0, 0], [0, 1, 0], h),
        _mode([0, B * w, 0], [1, 0, 0]), _mode([0, A * w, 0], [0, 0, 1], h),
        _mode([0, 0, C * w], [0, 1, 0]), _mode([0, 0, B * w], [1, 0, 0], h),
    ]
    return fourier_field(modes, space, "abc")


def field_catalog(space: AmbientSpace | None = None) -> dict[str, VectorField]:
    """Trigonometric exact fields on the unit torus, keyed by name."""
    space = space or AmbientSpace.torus()
    return {
        "abc": abc_field(space),
        "mode_x": fourier_field([_mode([0, 1, 0], [1, 0, 0])], space, "mode_x"),
        "zx": fourier_field([_mode([1, 0, 0], [0, 0, 1])], space, "zx"),
        "zy": fourier_field([_mode([0, 1, 0], [0, 0, 1])], space, "zy"),
        "r1": random_trig_field(1, space),
        "r2": random_trig_field(2, space),
        "r3": random_trig_field(3, space),
    }


FIELD_DOCS = {
    "abc": "ABC flow A=B=C=1, potential X / 2pi",
    "mode_x": "potential sin(2 pi x) e_y, field 2 pi cos(2 pi x) e_z",
    "zx": "potential sin(2 pi z) e_x, field 2 pi cos(2 pi z) e_y",
    "zy": "potential sin(2 pi z) e_y, field -2 pi cos(2 pi z) e_x",
    "r1": "seeded random 3-mode trigonometric field (seed 1)",
    "r2": "seeded random 3-mode trigonometric field (seed 2)",
    "r3": "seeded random 3-mode trigonometric field (seed 3)",
}


def _space(spec) -> AmbientSpace:
    if spec is None:
        return AmbientSpace.euclidean()
    if isinstance(spec, AmbientSpace):
        return spec
    kind = spec.get("kind", "euclidean")
    if kind == "torus":
        return AmbientSpace.torus(tuple(spec.get("periods", (1.0, 1.0, 1.0))))
    if kind == "sphere":
        return AmbientSpace.sphere()
    return AmbientSpace.euclidean()


LOOP_GENERATORS = {
    "circle": Entry("loop", "circle", "R=1.0, n=256, center=[0,0,0]",
                    lambda space, R=1.0, n=256, center=(0, 0, 0): loops.circle(R, n, center, space)),
    "ellipse": Entry("loop", "ellipse", "a=1.5, b=1.0, n=256",
                     lambda space, a=1.5, b=1.0, n=256: loops.ellipse(a, b, n, space)),
    "torus_loop": Entry("loop", "torus_loop", "direction in {x,y,z}, offsets=[0,0], n=256, wobble=0.0",
                        lambda space, direction="z", offsets=(0.0, 0.0), n=256, wobble=0.0:
                        loops.torus_loop(direction, offsets, n, space, wobble)),
    "trefoil": Entry("loop", "trefoil", "n=256, scale=1.0",
                     lambda space, n=256, scale=1.0: loops.trefoil(n, scale, space)),
}

DIFFEO_FAMILIES = {
    "rotation_z": Entry("diffeo", "rotation_z", "angle (Euclidean only)",
                        lambda space, angle=0.0: rotation_z(angle, space)),
    "shear": Entry("diffeo", "shear", "a, b: (x, y + a sin 2pi x, z + b sin 2pi(x+y))",
                   lambda space, a=0.1, b=0.0: trig_shear(a, b, space)),
    "translation": Entry("diffeo", "translation", "c=[cx,cy,cz]",
                         lambda space, c=(0, 0, 0): translation(c, space)),
}


def build_loop(name: str, space: AmbientSpace, params: dict) -> loops.DiscreteLoop:
    if name not in LOOP_GENERATORS:
        raise KeyError(f"unknown loop generator {name!r}")
    return LOOP_GENERATORS[name].build(space, **params)


def list_generators() -> str:
    """Sorted, stable catalog text."""
    lines = []
    for kind, table in (
        ("loop", {k: e.params for k, e in LOOP_GENERATORS.items()}),
        ("field", FIELD_DOCS),
        ("diffeo", {k: e.params for k, e in DIFFEO_FAMILIES.items()}),
    ):
        for name in sorted(table):
            lines.append(f"{kind:<7}{name:<12}{table[name]}")
    return "\n".join(lines)
