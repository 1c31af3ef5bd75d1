import numpy as np
import pytest

from hpdg.hpspace import (DiscreteField, build_space, constant_field, evaluate,
                          evaluate_in_element, inject, load_field, locate_point,
                          project, save_field)
from hpdg.mesh import build_graded_mesh
from hpdg.quadrature import element_rule


def test_degree_formula_with_slope():
    # p_K = p0 + round(s * (ell - j)), round half up
    mesh = build_graded_mesh(2, 0.5, 4)
    space = build_space(mesh, 2, 0.5)
    for e in mesh.elements:
        assert space.degrees[e.id] == 2 + int(np.floor(0.5 * (4 - e.layer) + 0.5))
    # an (ell=4, s=1/2) layer-0 element would get p0 + 2; layer 1 does here
    assert space.degrees[[e.id for e in mesh.elements if e.layer == 1][0]] == 2 + 2


def test_zero_slope_is_uniform():
    mesh = build_graded_mesh(2, 0.5, 3)
    space = build_space(mesh, 3, 0.0)
    assert np.all(space.degrees == 3)


def test_dof_count_ell0():
    mesh = build_graded_mesh(2, 0.5, 0)
    space = build_space(mesh, 1, 0.0)
    assert space.N == 4 * (1 + 1) ** 2


def test_degree_monotonicity():
    mesh = build_graded_mesh(2, 0.5, 6)
    for slope in (0.0, 0.125, 0.25, 0.5):
        space = build_space(mesh, 2, slope)
        by_layer = {}
        for e in mesh.elements:
            by_layer.setdefault(e.layer, set()).add(int(space.degrees[e.id]))
        layers = sorted(by_layer)
        degs = [max(by_layer[j]) for j in layers]
        assert all(a >= b for a, b in zip(degs, degs[1:]))


def test_rounding_modes():
    mesh = build_graded_mesh(2, 0.5, 3)
    up = build_space(mesh, 2, 0.25, rounding="ceil")
    down = build_space(mesh, 2, 0.25, rounding="floor")
    assert np.all(up.degrees >= down.degrees)
    with pytest.raises(ValueError):
        build_space(mesh, 2, 0.25, rounding="banker")


def test_build_space_validation():
    mesh = build_graded_mesh(2, 0.5, 1)
    with pytest.raises(ValueError):
        build_space(mesh, 0, 0.0)
    with pytest.raises(ValueError):
        build_space(mesh, 2, -0.5)


def test_locate_quadrant():
    mesh = build_graded_mesh(2, 0.5, 0)
    eid = locate_point(mesh, [0.3, 0.3])
    e = mesh.elements[eid]
    assert np.all(e.lo >= 0) and np.all(e.hi > 0)


def test_locate_singular_point_tie_break():
    mesh = build_graded_mesh(2, 0.5, 2)
    eid = locate_point(mesh, [0.0, 0.0])
    containing = [
        e.id for e in mesh.elements
        if np.all(e.lo <= 0) and np.all(e.hi >= 0)
    ]
    assert eid == min(containing)


def test_locate_boundary_corner():
    mesh = build_graded_mesh(2, 0.5, 1)
    eid = locate_point(mesh, [0.5, 0.5])
    e = mesh.elements[eid]
    assert np.all(np.abs(e.hi - 0.5) < 1e-15)


def test_locate_outside_raises():
    mesh = build_graded_mesh(2, 0.5, 1)
    with pytest.raises(ValueError):
        locate_point(mesh, [0.7, 0.0])


def test_evaluate_constant_field():
    mesh = build_graded_mesh(2, 0.5, 2)
    space = build_space(mesh, 2, 0.5)
    one = constant_field(space, 1.0)
    rng = np.random.default_rng(7)
    for x in rng.uniform(-0.5, 0.5, size=(20, 2)):
        assert evaluate(one, x) == pytest.approx(1.0, abs=1e-14)


def test_single_mode_vanishes_at_center():
    mesh = build_graded_mesh(2, 0.5, 0)
    space = build_space(mesh, 1, 0.0)
    c = np.zeros(space.N)
    # mode (1, 0) of element 0: P_1 in x, P_0 in y
    c[space.offsets[0] + 2] = 1.0  # C-order modes: (0,0),(0,1),(1,0),(1,1)
    f = DiscreteField(space, c)
    e = mesh.elements[0]
    assert evaluate(f, e.center) == pytest.approx(0.0, abs=1e-15)


def test_field_minus_itself():
    mesh = build_graded_mesh(2, 0.5, 1)
    space = build_space(mesh, 2, 0.0)
    rng = np.random.default_rng(3)
    f = DiscreteField(space, rng.standard_normal(space.N))
    g = DiscreteField(space, f.coeffs - f.coeffs)
    for x in rng.uniform(-0.5, 0.5, size=(10, 2)):
        assert evaluate(g, x) == 0.0


def test_round_trip_locate_gauss_points():
    mesh = build_graded_mesh(2, 0.5, 2)
    for e in mesh.elements:
        rule = element_rule(e, 3)
        for x in rule.points:
            located = mesh.elements[locate_point(mesh, x)]
            assert np.all(located.lo <= x + 1e-14) and np.all(x <= located.hi + 1e-14)


def test_projection_reproduces_polynomials():
    mesh = build_graded_mesh(2, 0.5, 3)
    space = build_space(mesh, 2, 0.0)
    rng = np.random.default_rng(11)
    coef = rng.standard_normal((3, 3))

    def q(pts):
        x, y = pts[:, 0], pts[:, 1]
        return sum(coef[i, j] * x**i * y**j for i in range(3) for j in range(3))

    f = project(space, q)
    pts = rng.uniform(-0.5, 0.5, size=(100, 2))
    for x in pts:
        assert evaluate(f, x) == pytest.approx(float(q(x[None, :])[0]), abs=1e-11)


def test_injection_is_exact_on_chain():
    coarse_space = build_space(build_graded_mesh(2, 0.5, 2), 2, 0.25)
    fine_space = build_space(build_graded_mesh(2, 0.5, 3), 2, 0.25)
    rng = np.random.default_rng(5)
    f = DiscreteField(coarse_space, rng.standard_normal(coarse_space.N))
    g = inject(f, fine_space)
    for x in rng.uniform(-0.49, 0.49, size=(50, 2)):
        # compare one-sided element evaluations: pick the fine element first
        eid = locate_point(fine_space.mesh, x)
        cid = locate_point(coarse_space.mesh, fine_space.mesh.elements[eid].center)
        got = evaluate_in_element(g, eid, x[None, :])[0]
        want = evaluate_in_element(f, cid, x[None, :])[0]
        assert got == pytest.approx(want, abs=1e-12)


def test_field_serialization_round_trip(tmp_path):
    space = build_space(build_graded_mesh(2, 0.5, 2), 2, 0.125)
    rng = np.random.default_rng(9)
    f = DiscreteField(space, rng.standard_normal(space.N))
    path = tmp_path / "field.txt"
    save_field(f, path)
    g = load_field(path)
    assert g.space.N == space.N
    assert g.space.p0 == space.p0 and g.space.mesh.ell == space.mesh.ell
    assert np.array_equal(g.coeffs, f.coeffs)


def test_coefficient_length_checked():
    space = build_space(build_graded_mesh(2, 0.5, 1), 1, 0.0)
    with pytest.raises(ValueError):
        DiscreteField(space, np.zeros(space.N + 1))
