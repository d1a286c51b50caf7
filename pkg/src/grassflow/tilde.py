"""Tilde operator on discrete loops: functions, 1-forms and 2-forms on loop space.

Two quadrature grids are used.  Line integrals of ambient 1-forms take the
edge-midpoint rule; anything involving normal sections (which live at vertices)
takes the vertex rule weighted by dual lengths.
"""

from __future__ import annotations

import numpy as np

from .ambient import Diffeo, DifferentialForm, VectorField, interior, pullback, volume
from .errors import DegreeMismatchError, SpaceMismatchError
from .loops import DiscreteLoop, _as_section, project_normal, random_sections, rotate_J


def _check(form: DifferentialForm, degree: int, loop: DiscreteLoop):
    if form.degree != degree:
        raise DegreeMismatchError(f"expected a {degree}-form, got degree {form.degree}")
    if form.space != loop.space:
        raise SpaceMismatchError("form and loop live on different spaces")


def tilde_function(beta: DifferentialForm, loop: DiscreteLoop) -> float:
    """Midpoint-rule line integral of a 1-form over the oriented loop."""
    _check(beta, 1, loop)
    return float(np.sum(beta(loop.midpoints, loop.edges)))


def tilde_oneform(beta: DifferentialForm, loop: DiscreteLoop, Y) -> float:
    """sum_i beta(v_i)(Y_i, t_i) * l_i for a 2-form beta."""
    _check(beta, 2, loop)
    Y = _as_section(loop, Y)
    return float(np.sum(beta(loop.vertices, Y, loop.tangents) * loop.dual_lengths))


def tilde_twoform(alpha: DifferentialForm, loop: DiscreteLoop, Y1, Y2) -> float:
    """sum_i alpha(v_i)(Y1_i, Y2_i, t_i) * l_i for a 3-form alpha."""
    _check(alpha, 3, loop)
    Y1 = _as_section(loop, Y1)
    Y2 = _as_section(loop, Y2)
    return float(np.sum(alpha(loop.vertices, Y1, Y2, loop.tangents) * loop.dual_lengths))


def mw_symplectic(loop: DiscreteLoop, Y1, Y2) -> float:
    """Marsden-Weinstein form: integral over the loop of vol(Y1, Y2, t)."""
    return tilde_twoform(volume(loop.space), loop, Y1, Y2)


def tilde_metric(loop: DiscreteLoop, Y1, Y2) -> float:
    Y1 = _as_section(loop, Y1)
    Y2 = _as_section(loop, Y2)
    return float(np.sum(np.einsum("ij,ij->i", Y1, Y2) * loop.dual_lengths))


def compatibility_residual(loop: DiscreteLoop, trials: int = 100, seed: int = 0) -> float:
    """max |Omega(Y1, Y2) - g(J Y1, Y2)| relative to |Y1| |Y2| over random sections."""
    secs = random_sections(loop, 2 * trials, seed)
    worst = 0.0
    for Y1, Y2 in zip(secs[::2], secs[1::2]):
        lhs = mw_symplectic(loop, Y1, Y2)
        rhs = tilde_metric(loop, rotate_J(loop, Y1), Y2)
        scale = np.sqrt(tilde_metric(loop, Y1, Y1) * tilde_metric(loop, Y2, Y2))
        if scale > 0:
            worst = max(worst, abs(lhs - rhs) / scale)
    return worst


def pullback_check(phi: Diffeo, alpha: DifferentialForm, loop: DiscreteLoop, trials: int = 10, seed: int = 0) -> float:
    """max |alpha~_{phi(N)}(P T phi Y1, P T phi Y2) - (phi^* alpha)~_N(Y1, Y2)|.

    Both sides agree in the continuum; at finite resolution the difference is
    quadrature error and shrinks like h^2.
    """
    _check(alpha, 3, loop)
    image = loop.with_vertices(phi(loop.vertices))
    T = phi.T(loop.vertices)
    pulled = pullback(phi, alpha)
    worst = 0.0
    secs = random_sections(loop, 2 * trials, seed)
    for Y1, Y2 in zip(secs[::2], secs[1::2]):
        Z1 = project_normal(image, np.einsum("nij,nj->ni", T, Y1))
        Z2 = project_normal(image, np.einsum("nij,nj->ni", T, Y2))
        lhs = tilde_twoform(alpha, image, Z1, Z2)
        rhs = tilde_twoform(pulled, loop, Y1, Y2)
        worst = max(worst, abs(lhs - rhs))
    return worst


def contraction_check(X: VectorField, alpha: DifferentialForm, loop: DiscreteLoop, trials: int = 10, seed: int = 0) -> float:
    """max |alpha~(zeta_X, Y) - (i_X alpha)~(Y)| over random normal Y."""
    _check(alpha, 3, loop)
    zeta = project_normal(loop, X(loop.vertices))
    contracted = interior(X, alpha)
    worst = 0.0
    for Y in random_sections(loop, trials, seed):
        lhs = tilde_twoform(alpha, loop, zeta, Y)
        rhs = tilde_oneform(contracted, loop, Y)
        worst = max(worst, abs(lhs - rhs))
    return worst
