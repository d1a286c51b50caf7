"""The ten acceptance criteria as runnable check suites.

Each criterion returns a :class:`CriterionResult` holding named checks with
their tolerances.  The suites are exposed through ``grassflow check``.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import extension as ext
from . import filament as fl
from . import prequant as pq
from .ambient import AmbientSpace, area_form, density_form, trig_shear, volume
from .catalog import field_catalog
from .errors import GrassflowError
from .loops import circle, ellipse, project_normal, random_sections, torus_loop, trefoil
from .tilde import compatibility_residual, contraction_check, mw_symplectic, pullback_check


@dataclass
class Check:
    name: str
    value: float
    tolerance: float
    passed: bool
    kind: str = "max"  # "max": value < tol; "min": value >= tol; "eq": exact equality flag

    def to_json(self) -> dict:
        return {"name": self.name, "value": _finite(self.value), "tolerance": self.tolerance, "pass": self.passed}


def _finite(x):
    x = float(x)
    return x if np.isfinite(x) else repr(x)


def below(name: str, value: float, tol: float) -> Check:
    value = float(value)
    return Check(name, value, tol, bool(np.isfinite(value) and value < tol))


def at_least(name: str, value: float, tol: float) -> Check:
    value = float(value)
    return Check(name, value, tol, bool(np.isfinite(value) and value >= tol), "min")


@dataclass
class CriterionResult:
    number: int
    title: str
    checks: list[Check] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(c.passed for c in self.checks)

    def summary(self) -> str:
        worst = [c for c in self.checks if not c.passed]
        status = "PASS" if self.passed else "FAIL"
        detail = "; ".join(f"{c.name}={c.value:.3e} (tol {c.tolerance:g})" for c in (worst or self.checks))
        return f"[{status}] criterion {self.number:>2} {self.title}: {detail}"

    def to_json(self) -> dict:
        return {
            "criterion": self.number,
            "title": self.title,
            "pass": self.passed,
            "seconds": self.seconds,
            "checks": [c.to_json() for c in self.checks],
            "notes": self.notes,
        }


def orders(values) -> list[float]:
    """Observed convergence orders log2(e_k / e_{k+1}) under mesh doubling."""
    v = np.asarray(values, float)
    return list(np.log2(v[:-1] / v[1:]))


# --------------------------------------------------------------------------- criteria


def sphere_holonomy_criterion() -> CriterionResult:
    r = CriterionResult(1, "sphere holonomy")
    t0 = time.perf_counter()
    rep = pq.sphere_holonomy(np.pi / 2, "north", 512)
    omega = area_form(AmbientSpace.sphere())
    gap, k = pq.integrality_gap(pq.cap_filling(np.pi / 2, "north", 512), pq.cap_filling(np.pi / 2, "south", 512), omega)
    r.seconds = time.perf_counter() - t0
    r.checks += [
        below("|holonomy(equator, north) - 0.5|", abs(rep.value_mod_1 - 0.5), 1e-6),
        below("north-south integrality gap", gap, 1e-6),
        Check("north-south integer", k, 1, k == 1, "eq"),
        below("runtime_s", r.seconds, 1.0),
    ]
    return r


def rotation_hamiltonian_criterion() -> CriterionResult:
    r = CriterionResult(2, "rotation Hamiltonian")
    t0 = time.perf_counter()
    pole = pq.sphere_rotation_hamiltonian(0.0)
    equator = pq.sphere_rotation_hamiltonian(np.pi / 2)
    mean = pq.sphere_function_integral(pq.sphere_rotation_hamiltonian)
    r.seconds = time.perf_counter() - t0
    r.checks += [
        below("||f(pole)| - 0.5|", abs(abs(pole) - 0.5), 1e-8),
        below("|f(equator)|", abs(equator), 1e-10),
        below("|int f omega|", abs(mean), 1e-6),
        below("runtime_s", r.seconds, 1.0),
    ]
    r.notes.append(f"f(north pole) = {pole:+.12f}")
    return r


def circle_translation_criterion(substeps: int = 1) -> CriterionResult:
    r = CriterionResult(3, "binormal-flow circle translation")
    t0 = time.perf_counter()
    loop = circle(1.0, 256)
    cfg = fl.FlowConfig(dt=1e-3, steps=100, integrator="rk4", substeps=substeps)
    try:
        traj = fl.run(loop, cfg)
        final = traj.final.loop.vertices
        center, _, _, rms = fl.fit_circle(final)
        disp = float(np.linalg.norm(center - np.array([0.0, 0.0, 0.1])))
        drift = traj.relative_length_drift
    except GrassflowError as exc:
        r.notes.append(f"flow failed: {exc}")
        disp = rms = drift = float("inf")
    r.seconds = time.perf_counter() - t0
    r.checks += [
        below("|center - 0.1 e3|", disp, 1e-4),
        below("circle-fit rms", rms, 1e-4),
        below("relative length drift", drift, 1e-6),
        below("runtime_s", r.seconds, 5.0),
    ]
    r.notes.append(
        f"substeps={substeps}; single-step stability limit at this resolution is "
        f"{fl.max_stable_dt(loop):.3e}"
    )
    return r


def gradient_identity_criterion() -> CriterionResult:
    r = CriterionResult(4, "gradient identity")
    t0 = time.perf_counter()
    for name, make in (("circle", lambda n: circle(1.0, n)), ("ellipse", lambda n: ellipse(1.5, 1.0, n))):
        res = [fl.gradient_residual(make(n), trials=8, seed=0) for n in (64, 128, 256)]
        r.checks.append(at_least(f"{name} order", min(orders(res)), 1.9))
        r.checks.append(below(f"{name} residual n=256", res[-1], 1e-3))
    r.seconds = time.perf_counter() - t0
    r.checks.append(below("runtime_s", r.seconds, 10.0))
    return r


def hamiltonian_moment_criterion() -> CriterionResult:
    r = CriterionResult(5, "moment map is Hamiltonian")
    t0 = time.perf_counter()
    T = AmbientSpace.torus()
    cat = field_catalog(T)
    X = cat["r1"] + cat["mode_x"]
    res = []
    for n in (64, 128, 256):
        loop = torus_loop("z", (0.3, 0.6), n, T, wobble=0.05)
        base = torus_loop("z", (0.3, 0.6), n, T)
        res.append(ext.hamiltonian_residual(loop, X, base, trials=8, seed=0))
    r.checks.append(at_least("refinement order", min(orders(res)), 1.9))
    loop = torus_loop("y", (0.1, 0.0), 512, T)
    base = torus_loop("y", (0.0, 0.0), 512, T)
    Y = project_normal(loop, [1.0, 0.0, 0.0])
    r.checks.append(below("closed-form torus case n=512", ext.hamiltonian_residual(loop, cat["mode_x"], base, sections=[Y]), 1e-5))
    r.seconds = time.perf_counter() - t0
    return r


def _oracle_2pi2(nodes: int = 10_000) -> float:
    """Brute-force -int_0^1 det(X, Y, e_z) dz for the fixture fields, independent of the loop code."""
    z = (np.arange(nodes) + 0.5) / nodes
    X = np.stack([-2 * np.pi * np.cos(2 * np.pi * z), 0 * z, 0 * z], axis=-1)
    Y = np.stack([0 * z, 2 * np.pi * np.cos(2 * np.pi * z), 0 * z], axis=-1)
    return -float(np.mean(np.einsum("ij,ij->i", np.cross(X, Y), np.broadcast_to([0.0, 0.0, 1.0], X.shape))))


def cocycle_criterion() -> CriterionResult:
    r = CriterionResult(6, "cocycle suite")
    t0 = time.perf_counter()
    T = AmbientSpace.torus()
    cat = field_catalog(T)
    base = torus_loop("z", (0.3, 0.6), 1024, T)
    names = sorted(cat)
    anti = max(abs(ext.cocycle_c(base, cat[a], cat[b]) + ext.cocycle_c(base, cat[b], cat[a])) for a in names for b in names)
    r.checks.append(Check("antisymmetry (exact)", anti, 0.0, anti == 0.0, "eq"))
    jac = ext.cocycle_identity_residual(base, cat["r1"], cat["r2"], cat["r3"])
    r.checks.append(below("cocycle identity r1,r2,r3 n=1024", jac, 1e-8))
    probes = [torus_loop("z", (0.2 + 0.05 * k, 0.7 - 0.03 * k), 2048, T, wobble=0.02 * k) for k in range(1, 6)]
    base2 = torus_loop("z", (0.25, 0.6), 2048, T)
    const = ext.cocycle_formula_constancy(base2, cat["zy"], cat["zx"], probes)
    r.checks.append(below("formula constancy spread (5 probes)", const.spread, 1e-5))
    value = ext.cocycle_c(torus_loop("z", (0.3, 0.6), 512, T), cat["zy"], cat["zx"])
    oracle = _oracle_2pi2()
    r.checks.append(below("|c(zy, zx) - oracle|", abs(value - oracle), 1e-4))
    r.checks.append(below("|oracle - 2 pi^2|", abs(oracle - 2 * np.pi ** 2), 1e-4))
    r.notes.append(f"c(zy, zx) = {value:.8f}, oracle {oracle:.8f}")
    r.seconds = time.perf_counter() - t0
    return r


def iso_criterion() -> CriterionResult:
    r = CriterionResult(7, "homologous-shift identity")
    t0 = time.perf_counter()
    T = AmbientSpace.torus()
    cat = field_catalog(T)
    n = 512
    p0, p1 = np.array([0.2, 0.3]), np.array([0.55, 0.45])
    base = torus_loop("z", tuple(p0), n, T)
    base2 = torus_loop("z", tuple(p1), n, T)
    zline = lambda p: (lambda v: np.stack([p[0] + 0 * v, p[1] + 0 * v, v], axis=-1))
    B = ext.straight_bordism(zline(p0), zline(p1), T, (128, 128))
    r.checks.append(below("iso residual r2, r3", ext.iso_check(base, base2, B, cat["r2"], cat["r3"]), 1e-4))
    r.notes.append(f"r1, r2 pair at the same mesh: {ext.iso_check(base, base2, B, cat['r1'], cat['r2']):.3e}")
    yline = lambda x: (lambda v: np.stack([x + 0 * v, v, 0 * v], axis=-1))
    x0 = 0.3
    C = ext.straight_bordism(yline(0.0), yline(x0), T, (128, 128))
    X = cat["mode_x"]
    stokes = ext.lambda0(C, X) + ext.moment(torus_loop("y", (x0, 0.0), n, T), X, torus_loop("y", (0.0, 0.0), n, T))
    r.checks.append(below("|lambda0 + moment|", abs(stokes), 1e-4))
    r.seconds = time.perf_counter() - t0
    return r


def _zloop_sweep(x, y, space, res=(64, 64, 64)):
    return pq.SweepMap(lambda s, t, th: np.stack(np.broadcast_arrays(x(s, t), y(s, t), th), axis=-1), space, res)


def integrality_criterion() -> CriterionResult:
    r = CriterionResult(8, "integrality")
    t0 = time.perf_counter()
    T = AmbientSpace.torus()
    vol = volume(T)
    # relative pair: filling around a unit-mass bump versus a flat filling
    bump = pq.bump_form((0.5, 0.45, 0.5), 0.25, T)
    A = _zloop_sweep(lambda s, t: s * t, lambda s, t: 0.9 * np.sin(np.pi * s) * np.sin(0.5 * np.pi * t), T)
    B = _zloop_sweep(lambda s, t: s * t, lambda s, t: 0 * s, T)
    gap, k = pq.integrality_gap(A, B, bump)
    r.checks.append(below("bump double-filling gap 64^3", gap, 1e-4))
    r.checks.append(Check("bump double-filling integer", k, 1, abs(k) == 1, "eq"))
    # identical-boundary pair for vol itself
    C = _zloop_sweep(lambda s, t: 0.2 + 0.5 * s * t, lambda s, t: 0.3 + 0.4 * t, T)
    D = _zloop_sweep(
        lambda s, t: 0.2 + 0.5 * s * t + 0.1 * np.sin(np.pi * s) * np.sin(np.pi * t),
        lambda s, t: 0.3 + 0.4 * t + 0.1 * np.sin(np.pi * s) * np.sin(2 * np.pi * t), T)
    gap2, k2 = pq.integrality_gap(C, D, vol)
    r.checks.append(below("vol double-filling gap 64^3", gap2, 1e-4))
    whole = pq.chain_integral(C, vol)
    parts = pq.chain_integral(C.restrict(0, 0.0, 0.5, 32), vol) + pq.chain_integral(C.restrict(0, 0.5, 1.0, 32), vol)
    r.checks.append(below("subdivision additivity", abs(whole - parts), 1e-10))
    r.notes.append(f"vol pair integer {k2}, bump pair integer {k}")
    r.seconds = time.perf_counter() - t0
    return r


def tilde_identities_criterion() -> CriterionResult:
    r = CriterionResult(9, "tilde-calculus identities")
    t0 = time.perf_counter()
    loop = trefoil(256)
    secs = random_sections(loop, 40, seed=3)
    anti = 0.0
    for Y1, Y2 in zip(secs[::2], secs[1::2]):
        a, b = mw_symplectic(loop, Y1, Y2), mw_symplectic(loop, Y2, Y1)
        anti = max(anti, abs(a + b) / max(abs(a), 1e-300))
    r.checks.append(below("Omega antisymmetry (relative)", anti, 1e-12))
    r.checks.append(below("Omega-g-J compatibility (relative)", compatibility_residual(loop, 100, seed=0), 1e-12))
    T = AmbientSpace.torus()
    rho = lambda p: 1 + 0.3 * np.sin(2 * np.pi * p[..., 0]) * np.cos(2 * np.pi * p[..., 1]) + 0.2 * np.cos(2 * np.pi * p[..., 2])
    alpha = density_form(rho, T, "rho vol")
    zl = torus_loop("z", (0.3, 0.4), 256, T, wobble=0.05)
    r.checks.append(below("contraction identity", contraction_check(field_catalog(T)["abc"], alpha, zl, 10, seed=0), 1e-12))
    phi = trig_shear(0.1, 0.07, T)
    res = [pullback_check(phi, alpha, torus_loop("z", (0.3, 0.4), n, T, wobble=0.05), 6, seed=0) for n in (64, 128, 256)]
    r.checks.append(at_least("pullback identity order", min(orders(res)), 1.9))
    r.seconds = time.perf_counter() - t0
    return r


def conservation_criterion() -> CriterionResult:
    r = CriterionResult(10, "conservation under flow")
    t0 = time.perf_counter()
    loop = trefoil(256)
    traj = fl.run(loop, fl.FlowConfig(dt=1e-3, steps=500, cadence=50))
    r.checks.append(below("relative length drift", traj.relative_length_drift, 1e-5))
    r.checks.append(below("arc-density drift", traj.max_dual_length_drift, 1e-4))
    cfg = fl.FlowConfig(dt=1e-3, steps=1)
    state = fl.FlowState(loop)
    worst = 0.0
    for k in (1, 17, 100):
        a = fl.step(fl.FlowState(loop.roll(k)), cfg).loop.vertices
        b = fl.step(state, cfg).loop.roll(k).vertices
        worst = max(worst, float(np.max(np.abs(a - b))))
    r.checks.append(below("cyclic-relabel equivariance", worst, 1e-12))
    r.seconds = time.perf_counter() - t0
    return r


CRITERIA: dict[int, Callable[[], CriterionResult]] = {
    1: sphere_holonomy_criterion,
    2: rotation_hamiltonian_criterion,
    3: circle_translation_criterion,
    4: gradient_identity_criterion,
    5: hamiltonian_moment_criterion,
    6: cocycle_criterion,
    7: iso_criterion,
    8: integrality_criterion,
    9: tilde_identities_criterion,
    10: conservation_criterion,
}

SUITES: dict[str, tuple[int, ...]] = {
    "acceptance": tuple(CRITERIA),
    "extension": (5, 6, 7),
    "flow": (3, 4, 10),
    "prequant": (1, 2, 8),
    "quick": (1, 2, 6, 8, 9),
    "tilde": (9,),
}


TIMED = frozenset({1, 2, 3, 4})


def thread_cap() -> int:
    try:
        return max(1, int(os.environ.get("GRASSFLOW_THREADS", "1")))
    except ValueError:
        return 1


def run_suite(name: str, threads: int | None = None) -> list[CriterionResult]:
    """Run the criteria of a suite; results come back in criterion order."""
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    ids = SUITES[name]
    threads = thread_cap() if threads is None else threads
    if threads <= 1:
        return [CRITERIA[i]() for i in ids]
    # criteria with runtime limits are timed alone
    timed = [i for i in ids if i in TIMED]
    results = {i: CRITERIA[i]() for i in timed}
    with ThreadPoolExecutor(max_workers=threads) as pool:
        rest = [i for i in ids if i not in TIMED]
        results.update(zip(rest, pool.map(lambda i: CRITERIA[i](), rest)))
    return [results[i] for i in ids]
