import numpy as np
import pytest

from grassflow.ambient import AmbientSpace, compose, constant_field, identity_diffeo, pullback_field, translation, trig_shear
from grassflow.catalog import field_catalog
from grassflow.errors import MissingPotentialError, SpaceMismatchError
from grassflow.extension import (
    Bordism,
    algebra_bracket,
    cocycle_c,
    cocycle_formula_constancy,
    cocycle_identity_residual,
    cocycle_table,
    hamiltonian_residual,
    iso_check,
    kappa,
    lambda0,
    moment,
    straight_bordism,
)
from grassflow.loops import circle, fundamental_section, project_normal, torus_loop
from grassflow.tilde import mw_symplectic

T = AmbientSpace.torus()
CAT = field_catalog(T)
ZERO = constant_field([0, 0, 0], T)
ZERO = type(ZERO)(T, ZERO.value, ZERO.jacobian, ZERO.hessian, constant_field([0, 0, 0], T), "0")


def yloop(x0, n=256):
    return torus_loop("y", (x0, 0.0), n, T)


def zline(x, y):
    return lambda v: np.stack([x + 0 * v, y + 0 * v, v], axis=-1)


def yline(x):
    return lambda v: np.stack([x + 0 * v, v, 0 * v], axis=-1)


def test_moment_examples():
    X = CAT["mode_x"]
    base = yloop(0.0)
    assert moment(base, X, base) == 0.0
    for x0 in (0.1, 0.37, 0.8):
        assert abs(moment(yloop(x0), X, base) - np.sin(2 * np.pi * x0)) < 1e-6
    assert abs(moment(yloop(0.25), X, base) - 1.0) < 1e-6


def test_moment_requires_potential():
    X = constant_field([0, 0, 1.0], T)
    with pytest.raises(MissingPotentialError):
        moment(yloop(0.1), X, yloop(0.0))


def test_moment_space_mismatch():
    with pytest.raises(SpaceMismatchError):
        moment(circle(1.0, 32), CAT["zx"], yloop(0.0))


def test_moment_base_shift_consistency():
    X = CAT["r1"]
    N0 = torus_loop("z", (0.3, 0.6), 256, T)
    N1 = torus_loop("z", (0.5, 0.2), 256, T, wobble=0.03)
    probes = [torus_loop("z", (0.1 * k, 0.2 + 0.05 * k), 256, T, wobble=0.02 * k) for k in range(1, 6)]
    diffs = [moment(N, X, N0) - moment(N, X, N1) for N in probes]
    assert max(diffs) - min(diffs) < 1e-8


def test_hamiltonian_trivial_cases():
    loop = yloop(0.1, 128)
    assert hamiltonian_residual(loop, ZERO, yloop(0.0, 128)) == 0.0
    # tangential motion of a straight loop: both sides vanish
    assert hamiltonian_residual(loop, CAT["mode_x"], yloop(0.0, 128), sections=[loop.tangents]) < 1e-8


def test_hamiltonian_closed_form_case():
    loop = yloop(0.1, 512)
    Y = project_normal(loop, [1.0, 0.0, 0.0])
    assert hamiltonian_residual(loop, CAT["mode_x"], yloop(0.0, 512), sections=[Y]) < 1e-5


def test_hamiltonian_order():
    X = CAT["r2"] + CAT["abc"]
    res = [hamiltonian_residual(torus_loop("z", (0.3, 0.6), n, T, wobble=0.05), X, trials=6, seed=3) for n in (64, 128, 256)]
    assert min(np.log2(np.array(res[:-1]) / res[1:])) >= 1.9


def test_cocycle_examples():
    base = torus_loop("z", (0.3, 0.6), 512, T)
    X, Y = CAT["zy"], CAT["zx"]
    assert cocycle_c(base, X, X) == 0.0
    assert abs(cocycle_c(base, X, Y) - 2 * np.pi ** 2) < 1e-4
    assert cocycle_c(base, X, Y) == -cocycle_c(base, Y, X)


def test_cocycle_matches_symplectic_form():
    base = torus_loop("z", (0.3, 0.6), 256, T, wobble=0.04)
    for a, b in (("r1", "r2"), ("abc", "mode_x")):
        X, Y = CAT[a], CAT[b]
        omega = mw_symplectic(base, fundamental_section(X, base), fundamental_section(Y, base))
        assert abs(cocycle_c(base, X, Y) + omega) < 1e-12


def test_cocycle_bilinear():
    base = torus_loop("z", (0.3, 0.6), 256, T, wobble=0.04)
    X, Y, Z = CAT["r1"], CAT["r2"], CAT["r3"]
    lhs = cocycle_c(base, X + Z.scaled(2.0), Y)
    rhs = cocycle_c(base, X, Y) + 2 * cocycle_c(base, Z, Y)
    assert abs(lhs - rhs) < 1e-12


def test_cocycle_identity():
    base = torus_loop("z", (0.3, 0.6), 1024, T)
    assert cocycle_identity_residual(base, CAT["r1"], CAT["r2"], CAT["r3"]) < 1e-8
    assert cocycle_identity_residual(base, CAT["zx"], CAT["zy"], CAT["zx"]) < 1e-12
    # abelian triple: fields depending on z only commute
    assert cocycle_identity_residual(base, CAT["zx"], CAT["zy"], CAT["zx"].scaled(0.5) + CAT["zy"]) == 0.0


def test_cocycle_identity_wobbly_base_converges():
    res = [cocycle_identity_residual(torus_loop("z", (0.3, 0.6), n, T, wobble=0.05), CAT["r1"], CAT["abc"], CAT["r3"])
           for n in (256, 512, 1024)]
    assert min(np.log2(np.array(res[:-1]) / res[1:])) >= 1.9


def test_constancy_single_probe():
    base = torus_loop("z", (0.3, 0.6), 256, T)
    res = cocycle_formula_constancy(base, CAT["r1"], CAT["r2"], [base])
    assert res.spread == 0.0
    assert abs(res.values[0] - cocycle_c(base, CAT["r1"], CAT["r2"])) < 1e-12


def test_constancy_2pi2_fields():
    base = torus_loop("z", (0.25, 0.6), 2048, T)
    probes = [torus_loop("z", (0.2 + 0.05 * k, 0.7 - 0.03 * k), 2048, T, wobble=0.02 * k) for k in range(1, 6)]
    res = cocycle_formula_constancy(base, CAT["zy"], CAT["zx"], probes)
    assert res.spread < 1e-5
    assert abs(np.mean(res.values) - cocycle_c(base, CAT["zy"], CAT["zx"])) < 1e-5


def test_constancy_noncommuting_and_bracket_sign():
    base = torus_loop("z", (0.25, 0.6), 1024, T)
    probes = [torus_loop("z", (0.2 + 0.05 * k, 0.7 - 0.03 * k), 1024, T, wobble=0.02 * k) for k in range(1, 6)]
    res = cocycle_formula_constancy(base, CAT["r1"], CAT["r2"], probes)
    assert res.spread < 1e-4
    # the vector-field bracket instead of the group's algebra bracket breaks constancy
    B = -algebra_bracket(CAT["r1"], CAT["r2"])
    wrong = [moment(N, B, base) - mw_symplectic(N, fundamental_section(CAT["r1"], N), fundamental_section(CAT["r2"], N))
             for N in probes]
    assert max(wrong) - min(wrong) > 100 * res.spread


def test_kappa_examples():
    X = CAT["mode_x"]
    base = yloop(0.0)
    assert kappa(identity_diffeo(T), X, base) == 0.0
    for d in (0.1, 0.3):
        assert abs(kappa(translation([d, 0, 0], T), X, base) - np.sin(2 * np.pi * d)) < 1e-12


def test_kappa_cocycle_law():
    base = torus_loop("z", (0.3, 0.6), 512, T, wobble=0.03)
    phi, psi = trig_shear(0.08, 0.05, T), trig_shear(-0.06, 0.09, T)
    for name in ("r1", "abc"):
        X = CAT[name]
        lhs = kappa(compose(phi, psi), X, base)
        rhs = kappa(phi, X, base) + kappa(psi, pullback_field(phi, X), base)
        assert abs(lhs - rhs) < 1e-6


def test_kappa_depends_on_image_only():
    # this shear fixes the z-loop through (0, 0.5) pointwise
    base = torus_loop("z", (0.0, 0.5), 256, T)
    assert abs(kappa(trig_shear(0.1, 0.2, T), CAT["r1"], base) - kappa(identity_diffeo(T), CAT["r1"], base)) < 1e-15


def test_lambda0_examples():
    B = straight_bordism(yline(0.0), yline(0.3), T)
    assert lambda0(B, ZERO) == 0.0
    X = CAT["mode_x"]
    stokes = lambda0(B, X) + moment(yloop(0.3, 512), X, yloop(0.0, 512))
    assert abs(stokes) < 1e-4
    assert abs(abs(lambda0(B, X)) - abs(np.sin(0.6 * np.pi))) < 1e-4


def test_lambda0_bordism_independence():
    X = CAT["r1"]
    B1 = straight_bordism(zline(0.2, 0.3), zline(0.5, 0.45), T)

    def bent(u, v):
        s = (1 - u)[..., None] * zline(0.2, 0.3)(v) + u[..., None] * zline(0.5, 0.45)(v)
        bump = 0.1 * np.sin(np.pi * u) * np.sin(2 * np.pi * v)
        return s + np.stack([0 * bump, bump, 0.5 * bump], axis=-1)

    B2 = Bordism(bent, T)
    assert B1.boundary_error(torus_loop("z", (0.2, 0.3), 64, T), torus_loop("z", (0.5, 0.45), 64, T)) < 1e-8
    assert B2.boundary_error(torus_loop("z", (0.2, 0.3), 64, T), torus_loop("z", (0.5, 0.45), 64, T)) < 1e-8
    assert abs(lambda0(B1, X) - lambda0(B2, X)) < 1e-4


def test_iso_examples():
    base = torus_loop("z", (0.2, 0.3), 512, T)
    deg = straight_bordism(zline(0.2, 0.3), zline(0.2, 0.3), T)
    assert iso_check(base, base, deg, CAT["r1"], CAT["r2"]) < 1e-12
    base2 = torus_loop("z", (0.55, 0.45), 512, T)
    B = straight_bordism(zline(0.2, 0.3), zline(0.55, 0.45), T)
    assert iso_check(base, base2, B, CAT["r2"], CAT["r3"]) < 1e-4
    assert iso_check(base, base2, B, CAT["zx"], CAT["zy"]) < 1e-12
    assert abs(cocycle_c(base2, CAT["zx"], CAT["zy"]) - cocycle_c(base, CAT["zx"], CAT["zy"])) < 1e-4


def test_iso_converges_second_order():
    base = torus_loop("z", (0.2, 0.3), 512, T)
    base2 = torus_loop("z", (0.55, 0.45), 512, T)
    res = [iso_check(base, base2, straight_bordism(zline(0.2, 0.3), zline(0.55, 0.45), T, (g, g)), CAT["r1"], CAT["r2"])
           for g in (64, 128, 256)]
    assert min(np.log2(np.array(res[:-1]) / res[1:])) >= 1.9
    assert res[-1] < 1e-4


def test_cocycle_table_sorted():
    base = torus_loop("z", (0.3, 0.6), 128, T)
    rows = cocycle_table(base, {k: CAT[k] for k in ("zy", "zx", "r1")})
    assert [(a, b) for a, b, _ in rows][:3] == [("r1", "r1"), ("r1", "zx"), ("r1", "zy")]
    assert len(rows) == 9
