import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from grassflow.ambient import (
    AmbientSpace,
    FourierMode,
    compose,
    constant_field,
    curl_consistency_error,
    divergence_error,
    flow_point,
    fourier_field,
    identity_diffeo,
    inverse_error,
    jacobian_error,
    lie_bracket,
    linear_field,
    pullback_field,
    pushforward_field,
    rotation_field,
    rotation_z,
    sample_points,
    shear,
    translation,
    trig_shear,
    volume,
    volume_form,
    volume_preservation_error,
)
from grassflow.catalog import field_catalog
from grassflow.errors import DegreeMismatchError, MissingDataError, NonFiniteError, SpaceMismatchError

E = np.eye(3)
T = AmbientSpace.torus()
R3 = AmbientSpace.euclidean()


def test_volume_form_basis():
    assert volume_form(T, E[0], E[1], E[2]) == 1.0
    assert volume_form(T, E[0], E[0], E[2]) == 0.0
    assert volume_form(T, E[1], E[0], E[2]) == -1.0


def test_volume_form_rejects_sphere():
    with pytest.raises(DegreeMismatchError):
        volume_form(AmbientSpace.sphere(), E[0], E[1], E[2])


def test_volume_antisymmetry_samples():
    rng = np.random.default_rng(0)
    u, v, w = rng.normal(size=(3, 1000, 3))
    vol = volume(T)
    base = vol(np.zeros((1000, 3)), u, v, w)
    for perm in ((v, u, w), (u, w, v), (w, v, u)):
        assert np.max(np.abs(vol(np.zeros((1000, 3)), *perm) + base)) < 1e-13


def test_form_arity_checked():
    with pytest.raises(DegreeMismatchError):
        volume(T)(np.zeros(3), E[0], E[1])


def test_torus_reduce_and_lattice():
    assert np.allclose(T.reduce([1.25, -0.5, 3.0]), [0.25, 0.5, 0.0])
    assert T.is_lattice([1.0, -2.0, 0.0])
    assert not T.is_lattice([0.5, 0.0, 0.0])
    with pytest.raises(ValueError):
        AmbientSpace.torus((1.0, 0.0, 1.0))


def test_bracket_constants_commute():
    Z = lie_bracket(constant_field(E[0], R3), constant_field(E[1], R3))
    assert np.all(Z(sample_points(R3, 20, 1)) == 0)


def test_bracket_oracle():
    X = constant_field(E[0], R3)
    Y = linear_field(np.outer(E[1], E[0]), R3)  # x e2
    p = sample_points(R3, 50, 2)
    assert np.allclose(lie_bracket(X, Y)(p), E[1])


def test_bracket_antisymmetry():
    cat = field_catalog(T)
    p = sample_points(T, 100, 3)
    a, b = lie_bracket(cat["r1"], cat["abc"]), lie_bracket(cat["abc"], cat["r1"])
    assert np.max(np.abs(a(p) + b(p))) < 1e-12


def test_bracket_space_mismatch():
    with pytest.raises(SpaceMismatchError):
        lie_bracket(constant_field(E[0], R3), constant_field(E[0], T))


def test_jacobi_identity():
    cat = field_catalog(T)
    X, Y, Z = cat["r1"], cat["r2"], cat["abc"]
    p = sample_points(T, 200, 4)
    total = lie_bracket(X, lie_bracket(Y, Z))(p) + lie_bracket(Y, lie_bracket(Z, X))(p) + lie_bracket(Z, lie_bracket(X, Y))(p)
    assert np.max(np.abs(total)) < 1e-8


def test_bracket_potential_is_curl_consistent():
    cat = field_catalog(T)
    B = lie_bracket(cat["r1"], cat["r3"])
    p = sample_points(T, 300, 5)
    assert curl_consistency_error(B, p) < 1e-9
    assert jacobian_error(B, p) < 1e-6


def test_catalog_fields_exact():
    p = sample_points(T, 1000, 6)
    for X in field_catalog(T).values():
        assert curl_consistency_error(X, p) < 1e-10
        assert divergence_error(X, p) < 1e-10


def test_missing_hessian_reported():
    with pytest.raises(MissingDataError):
        rotation_field().potential.hess(np.zeros(3))


def test_flow_constant_field():
    p = np.array([0.3, -0.2, 1.0])
    assert np.allclose(flow_point(constant_field(E[2], R3), 0.25, p, 4), p + 0.25 * E[2], atol=1e-15)


def test_flow_rotation_full_period():
    p = np.array([1.0, 0.5, 0.2])
    q = flow_point(rotation_field(1.0), 2 * np.pi, p, 400)
    assert np.max(np.abs(q - p)) < 1e-8


def test_flow_linear_in_time_exact():
    X = constant_field([1.0, 2.0, -1.0], R3)
    p = np.zeros(3)
    assert np.allclose(flow_point(X, 1.0, p, 3), flow_point(X, 1.0, p, 6), atol=1e-15)


def test_flow_non_finite():
    X = linear_field(1e200 * np.eye(3), R3)
    with pytest.raises(NonFiniteError):
        flow_point(X, 1.0, np.ones(3), 2)


def test_pushforward_identity_and_translation():
    X = field_catalog(T)["r2"]
    p = sample_points(T, 50, 7)
    assert np.allclose(pushforward_field(identity_diffeo(T), X)(p), X(p))
    C = constant_field([0.2, 0.1, -0.3], T)
    assert np.allclose(pushforward_field(translation([0.3, 0.1, 0.0], T), C)(p), C(p))


def test_pushforward_shear_oracle():
    a = 0.1
    phi = trig_shear(a, 0.0, T)
    Y = pushforward_field(phi, constant_field(E[0], T))
    p = sample_points(T, 50, 8)
    x = p[:, 0]  # shear fixes x
    expected = np.stack([np.ones_like(x), 2 * np.pi * a * np.cos(2 * np.pi * x), 0 * x], axis=-1)
    assert np.allclose(Y(p), expected, atol=1e-14)


def test_pushforward_needs_inverse():
    from dataclasses import replace

    phi = replace(trig_shear(0.1, 0.0, T), inverse=None)
    with pytest.raises(MissingDataError):
        pushforward_field(phi, constant_field(E[0], T))


def test_pushforward_composition():
    phi, psi = trig_shear(0.1, 0.05, T), trig_shear(-0.07, 0.12, T)
    X = field_catalog(T)["abc"]
    p = sample_points(T, 200, 9)
    lhs = pushforward_field(compose(phi, psi), X)(p)
    rhs = pushforward_field(phi, pushforward_field(psi, X))(p)
    assert np.max(np.abs(lhs - rhs)) < 1e-8


def test_pushforward_transports_potential():
    phi = trig_shear(0.1, 0.05, T)
    Y = pushforward_field(phi, field_catalog(T)["r1"])
    p = sample_points(T, 200, 10)
    assert curl_consistency_error(Y, p) < 1e-8
    assert jacobian_error(Y, p) < 1e-6


def test_pullback_inverts_pushforward():
    phi = trig_shear(0.1, 0.05, T)
    X = field_catalog(T)["r3"]
    p = sample_points(T, 100, 11)
    assert np.max(np.abs(pullback_field(phi, pushforward_field(phi, X))(p) - X(p))) < 1e-12


def test_volume_preserving_diffeos():
    p = sample_points(T, 1000, 12)
    for phi in (trig_shear(0.2, 0.1, T), compose(trig_shear(0.1, 0.3, T), translation([0.2, 0, 0], T)),
                rotation_z(0.7, T)):
        assert phi.volume_preserving
        assert volume_preservation_error(phi, p) < 1e-10
        assert inverse_error(phi, p) < 1e-12


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-0.5, 0.5), min_size=3, max_size=3), st.floats(-0.3, 0.3), st.floats(-0.3, 0.3))
def test_shear_roundtrip_property(p, a, b):
    phi = trig_shear(a, b, T)
    p = np.asarray(p)
    assert np.allclose(phi.inv(phi(p)), p, atol=1e-12)
    assert abs(np.linalg.det(phi.T(p)) - 1.0) < 1e-12


def test_fourier_field_periodic():
    X = fourier_field([FourierMode((0.1, 0.2, 0.0), (1, -1, 1), 0.3)], T)
    p = sample_points(T, 20, 13)
    assert np.allclose(X(p), X(p + np.array([1.0, -2.0, 3.0])))
