"""Verification pipeline: contact sets, Jacobian bound, inequalities, audits."""

import math

import numpy as np
import pytest

from horocurv import verify_harness as vh
from horocurv.hypersurface import geodesic_sphere, radial_graph
from horocurv.model_spaces import parse_space
from horocurv.numeric_kernel import op_norm, psd_sqrt


@pytest.fixture(scope="module")
def e3():
    return parse_space("euclidean:3")


@pytest.fixture(scope="module")
def h3():
    return parse_space("hyperbolic:3,kappa=1")


@pytest.fixture(scope="module")
def e3_sphere(e3):
    return geodesic_sphere(e3, e3.origin(), 1.0, [24, 48])


@pytest.fixture(scope="module")
def h3_sphere(h3):
    return geodesic_sphere(h3, h3.origin(), 1.0, [24, 48])


def test_first_contact_euclidean_sphere(e3, e3_sphere):
    # [TRIVIAL] B_v = -<v, x> on the unit sphere: max 1 at x = -v
    o = e3.origin()
    rng = np.random.default_rng(0)
    for _ in range(5):
        v = e3.random_unit_tangent(o, rng)
        rec = vh.first_contact(e3_sphere, o, v)
        assert abs(rec.c_v - 1.0) < 1e-9
        cn = rec.representative
        assert cn.s_residual < 1e-6
        x = e3_sphere.point_at(cn.node)
        x_coords = np.asarray(x.parts[0])
        v_coords = np.asarray(e3.tangent_to_coords(v))
        assert np.max(np.abs(x_coords + v_coords)) < 1e-6


def test_first_contact_h3_sphere(h3, h3_sphere):
    # [DERIVED] on-ray identity: c_v = r, contact at the -v pole
    o = h3.origin()
    v = h3.random_unit_tangent(o, np.random.default_rng(1))
    rec = vh.first_contact(h3_sphere, o, v)
    assert abs(rec.c_v - 1.0) < 1e-9
    assert rec.representative.s_residual < 1e-6


def test_supporting_conditions(h3, h3_sphere):
    o = h3.origin()
    v = h3.random_unit_tangent(o, np.random.default_rng(2))
    rec = vh.first_contact(h3_sphere, o, v, grid_node_data=True)
    for cn in rec.nodes:
        assert cn.eig_min_support >= vh.EIG_FLOOR_SUPPORT
        assert cn.eig_min_hessian >= vh.EIG_FLOOR_HESS


def test_jacobian_h3_closed_forms(h3, h3_sphere):
    # [DERIVED] on H^3 sphere r=1: J = 1/sinh^2(1), GK = coth^2(1),
    # so J/GK = 1/cosh^2(1) <= 1 <= e^{12}
    o = h3.origin()
    v = h3.random_unit_tangent(o, np.random.default_rng(3))
    rec = vh.first_contact(h3_sphere, o, v, measure_jacobian=True)
    cn = rec.representative
    assert cn.stencil_ok
    assert abs(cn.jacobian - 1.0 / math.sinh(1.0) ** 2) < 1e-4
    assert abs(cn.GK - 1.0 / math.tanh(1.0) ** 2) < 1e-4
    rep = vh.jacobian_check(h3_sphere, o, rec)
    assert rep.passed
    assert rep.margin > 0.0


def test_jacobian_euclidean_equality(e3, e3_sphere):
    # [TRIVIAL] unit sphere, kappa = 0: J == GK == 1, bound tight up to slack
    o = e3.origin()
    v = e3.random_unit_tangent(o, np.random.default_rng(4))
    rec = vh.first_contact(e3_sphere, o, v, measure_jacobian=True)
    cn = rec.representative
    assert abs(cn.jacobian - 1.0) < 1e-5
    rep = vh.jacobian_check(e3_sphere, o, rec)
    assert rep.passed
    assert rep.margin < 2e-3 + 1e-5   # only the slack factor remains


def test_total_curvature_equality_case(e3, e3_sphere):
    # [PAPER] Euclidean sphere: lhs == rhs == 4pi (equality case)
    rep = vh.total_curvature_check(e3_sphere, e3.origin(), sweep_count=25)
    assert rep.passed
    assert abs(rep.lhs / (4 * math.pi) - 1) < 1e-6
    assert abs(rep.rhs / (4 * math.pi) - 1) < 1e-12


def test_total_curvature_h3(h3, h3_sphere):
    rep = vh.total_curvature_check(h3_sphere, h3.origin(), sweep_count=25)
    assert rep.passed
    assert abs(rep.lhs / (4 * math.pi * math.cosh(1.0) ** 2) - 1) < 5e-3
    assert rep.details["sweep_failures"] == 0


def test_contact_check_perturbed_graph(h3):
    M = radial_graph(h3, h3.origin(), 1.0, "latitude", 0.2, [24, 48])
    rep = vh.contact_check(M, h3.origin(), sweep_count=25)
    assert rep.passed
    assert rep.lhs <= vh.RESID_TOL


def test_willmore_umbilic_equality(h3, h3_sphere):
    rep = vh.willmore_check(h3_sphere, h3.origin())
    assert rep.passed
    # [TRIVIAL] umbilic: willmore == total curvature
    assert abs(rep.lhs / rep.details["total_curvature"] - 1) < 1e-9
    assert rep.details["A_psd_everywhere"]


def test_willmore_ellipsoid_like(e3):
    # [DERIVED] convex Euclidean graph: willmore >= 4pi
    M = radial_graph(e3, e3.origin(), 1.0, "coord", 0.3, [24, 48])
    rep = vh.willmore_check(M, e3.origin())
    assert rep.passed
    assert rep.lhs >= 4 * math.pi * (1 - 1e-6)


def test_isoperimetric_euclidean_sharp(e3):
    # [PAPER] Euclidean ratio is the sharp constant 36pi for any radius
    for r in (0.5, 1.0):
        rep = vh.isoperimetric_check(e3, e3.origin(), r,
                                     grid_counts=[24, 48], radial_nodes=16)
        assert rep.passed
        assert abs(rep.lhs / (36 * math.pi) - 1) < 1e-3


def test_isoperimetric_small_r_euclidean_limit(h3):
    # [DERIVED] r -> 0: the hyperbolic ratio approaches 36pi
    rep = vh.isoperimetric_check(h3, h3.origin(), 1e-2,
                                 grid_counts=[16, 32], radial_nodes=12)
    assert rep.passed
    assert abs(rep.lhs / (36 * math.pi) - 1) < 1e-2


def test_isoperimetric_h3_closed_form(h3):
    # [DERIVED] area = 4pi sinh^2(r), vol = pi (sinh(2r) - 2r)
    rep = vh.isoperimetric_check(h3, h3.origin(), 0.5,
                                 grid_counts=[24, 48], radial_nodes=16)
    assert rep.passed
    area = 4 * math.pi * math.sinh(0.5) ** 2
    vol = math.pi * (math.sinh(1.0) - 1.0)
    assert abs(rep.details["area"] / area - 1) < 1e-6
    assert abs(rep.details["volume"] / vol - 1) < 1e-6


def test_contact_level_continuity(h3):
    # |c_v - c_v'| <= D |v - v'| + 1e-6 (Lipschitz dependence on direction)
    M = radial_graph(h3, h3.origin(), 1.0, "coord", 0.2, [16, 32])
    o = h3.origin()
    d = M.diameter_extrinsic()
    vs = vh.sweep_directions(h3, o, 12, seed=5)
    recs = [vh.first_contact(M, o, v) for v in vs]
    for i in range(len(vs) - 1):
        dv = h3.norm(h3.add(vs[i], h3.scale(vs[i + 1], -1.0)))
        assert abs(recs[i].c_v - recs[i + 1].c_v) <= d * dv + 1e-6


def test_contact_level_monotone_in_radius(h3):
    # enlarging M pointwise never decreases c_v
    o = h3.origin()
    small = geodesic_sphere(h3, o, 0.6, [16, 32])
    big = radial_graph(h3, o, 0.8, "coord", 0.1, [16, 32])  # radius >= 0.72
    for v in vh.sweep_directions(h3, o, 6, seed=6):
        assert (vh.first_contact(big, o, v).c_v
                >= vh.first_contact(small, o, v).c_v - 1e-9)


def test_det_comparison_audit_cases():
    # [TRIVIAL] M = 0.5 N and M = N
    n = np.diag([2.0, 3.0, 4.0])
    assert abs(np.linalg.det(0.5 * n)) <= abs(np.linalg.det(n))
    rep = vh.det_comparison_audit(6, 300, seed=42)
    assert rep.passed
    assert rep.lhs == 0.0


def test_sqrt_perturbation_audit_cases():
    # [TRIVIAL] A == B gives 0 <= 0; [DERIVED] A, -A
    rng = np.random.default_rng(7)
    g = rng.standard_normal((5, 5))
    a = 0.5 * (g + g.T)
    assert op_norm(psd_sqrt(a @ a).a - psd_sqrt(a @ a).a) == 0.0
    lhs = op_norm(psd_sqrt(a @ a).a - psd_sqrt((-a) @ (-a)).a)
    assert lhs <= math.sqrt(5) * op_norm(2 * a) + 1e-12
    rep = vh.sqrt_perturbation_audit(8, 300, seed=42)
    assert rep.passed


def test_hessian_oracle_check_small(h3):
    rep = vh.hessian_oracle_check(h3, h3.origin(), samples=5, seed=42)
    assert rep.passed
    assert rep.lhs <= 1e-3


def test_hessian_bounds_check_small():
    space = parse_space("spd:3")
    rep = vh.hessian_bounds_check(space, space.origin(), samples=50, seed=42)
    assert rep.passed
    assert rep.details["violations"] == 0


def test_gauss_consistency_check(h3, h3_sphere):
    rep = vh.gauss_consistency_check(h3_sphere, h3.origin(), min_nodes=1000)
    assert rep.passed
    assert rep.lhs <= 1e-5


def test_report_shape(e3, e3_sphere):
    rep = vh.willmore_check(e3_sphere, e3.origin())
    d = rep.to_dict()
    assert set(d) == {"check", "space", "surface", "grid", "kappa", "diameter",
                      "lhs", "rhs", "margin", "pass", "tolerances", "seed",
                      "runtime_ms"}
    assert d["pass"] == (rep.margin >= -vh.INEQ_TOL * rep.rhs)
