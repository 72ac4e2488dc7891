"""
Tests for composition operators, Volterra operators, symbol classification,
strong continuity curves and the witness construction.
"""
import json
import math

import numpy as np
import pytest

import disklab
from tests.conftest import small_radii


HALF = disklab.fn_from_taylor([0, 0.5], label='z/2')
POINTS = np.array([0.0, 0.3, -0.5j, 0.4 + 0.4j, 0.8])
SMALL_GRIDS = disklab.WitnessGrids(levels=3, centers=8, ring_angles=16, focus_offsets=1, tol=1e-3)


def _profile(slope, values=(1.0, 1.0)):
    return disklab.SupProfile((0.9, 0.99), values, max(values), disklab.disk_point(0), slope)


# ============================================================================
# Composition
# ============================================================================

def test_compose_taylor_forms():
    """Test that e2∘(z/2) is composed as a series"""
    composed = disklab.operator_compose(HALF, disklab.fn_monomial(2))

    assert composed.coefficients is not None
    assert np.allclose(composed.coefficients[:3], [0, 0, 0.25])
    assert composed.value(0.4) == pytest.approx(0.04)


def test_compose_closed_forms():
    """Test that closed forms are composed through the chain rule"""
    phi = disklab.fn_from_closed_form('half', lambda z: 0.5 * np.asarray(z), lambda z: 0.5 * np.ones_like(np.asarray(z)))
    f = disklab.fn_log_test(0.5)

    composed = disklab.operator_compose(phi, f)

    assert np.allclose(composed.value(POINTS), f.value(0.5 * POINTS))
    assert np.allclose(composed.derivative(POINTS), 0.5 * f.derivative(0.5 * POINTS))


def test_compose_pulls_back_boundary_singularity():
    """Test that log_pole∘phi_b carries a focus at phi_b(1) = -1 for b = 1/2"""
    composed = disklab.operator_compose(disklab.fn_automorphism(0.5), disklab.fn_log_pole())

    assert any(abs(q + 1) < 1e-4 for q in composed.foci)
    assert composed.value(0.0) == pytest.approx(math.log(2))


def test_compose_constant_is_unchanged():
    """Test that C_phi fixes constants"""
    f = disklab.fn_constant(3)

    assert disklab.operator_compose(HALF, f) is f


def test_compose_rejects_non_self_map():
    """Test that symbols leaving the disk are refused"""
    with pytest.raises(ValueError, match="is not a self-map"):
        disklab.operator_compose(disklab.fn_from_taylor([0, 2]), disklab.fn_monomial(1))


@pytest.mark.parametrize('phi, alpha, expected', [
    (HALF, 0.0, 1.0),
    (HALF, 0.5, 1.0),
    (disklab.fn_constant(0.5), 0.0, 1 + math.log(2)),
    (disklab.fn_constant(0.5), 1.0, 2.0),
])
def test_composition_rhs(phi, alpha, expected):
    """Test the bound's right-hand side in both alpha regimes"""
    assert disklab.operator_composition_rhs(phi, alpha) == pytest.approx(expected)


@pytest.mark.parametrize('triple, univalent, bounded, case', [
    ((2, 1.5, 0), False, True, 'any_symbol'),
    ((2, 1, 0), True, True, 'univalent_symbol'),
    ((2, 1, 0), False, None, 'not_covered'),
    ((1.5, 0.3, 0), True, True, 'univalent_symbol'),
    ((2, 0, 0), True, None, 'outside_range'),
    ((2, 1, 0.5), True, None, 'outside_range'),
])
def test_composition_bounded_check(triple, univalent, bounded, case):
    """Test which sufficient condition covers each parameter triple"""
    report = disklab.operator_composition_bounded_check(disklab.space_params(*triple), univalent)

    assert report.bounded is bounded
    assert report.case == case
    assert report.bound_rhs is None


def test_composition_norm_probe():
    """Test that C_{z/2} halves the norm of e1"""
    params = disklab.space_params(2, 1.5, 0)

    report = disklab.operator_composition_norm_probe(HALF, params, catalogue=('e1',), radii=small_radii,
                                                     angles=8, tol=1e-7)

    assert report.ratios['e1'] == pytest.approx(0.5, rel=1e-5)
    assert report.max_ratio == pytest.approx(0.5, rel=1e-5)
    assert report.bound_rhs == pytest.approx(1.0)
    assert report.within_bound


def test_composition_norm_probe_needs_admissible():
    """Test that the norm comparison refuses collapsed parameters"""
    with pytest.raises(ValueError, match="needs admissible"):
        disklab.operator_composition_norm_probe(HALF, disklab.space_params(2, 1, 0.5))


# ============================================================================
# Volterra
# ============================================================================

def test_volterra_polynomials_exact():
    """Test that T_{z²} z = 2z³/3"""
    result = disklab.operator_volterra_apply(disklab.fn_monomial(2), disklab.fn_monomial(1))

    assert np.allclose(result.coefficients, [0, 0, 0, 2 / 3])


def test_volterra_constant_symbol():
    """Test that T_g = 0 for constant g"""
    result = disklab.operator_volterra_apply(disklab.fn_constant(2), disklab.fn_log_test(0.5))

    assert np.all(result.value(POINTS) == 0)


def test_volterra_of_one():
    """Test that T_g 1 = g - g(0)"""
    g = disklab.fn_log_test(0.5)

    result = disklab.operator_volterra_apply(g, disklab.fn_constant(1))

    assert np.allclose(result.value(POINTS), g.value(POINTS) - g.value(0j), atol=1e-10)
    assert result.value(0.3) == pytest.approx(complex(g.value(0.3) - g.value(0j)), abs=1e-10)


def test_volterra_derivative_identity():
    """Test that (T_g f)' = f g'"""
    g = disklab.fn_log_squared()
    f = disklab.fn_log_test(0.5)

    result = disklab.operator_volterra_apply(g, f)

    assert np.allclose(result.derivative(POINTS), f.value(POINTS) * g.derivative(POINTS))


# ============================================================================
# Symbol classification
# ============================================================================

def test_symbol_class_constant():
    """Test that constant symbols are bounded and compact"""
    report = disklab.operator_volterra_symbol_class(disklab.fn_constant(2), disklab.space_params(2, 1, 0.25))

    assert report.bounded_flag == 'consistent'
    assert report.compact_flag == 'consistent'
    assert report.evidence['rule'] == 'constant'


def test_symbol_class_univalent_hint():
    """Test that the M_0 rule sees e1 as a compact symbol"""
    report = disklab.operator_volterra_symbol_class(disklab.fn_monomial(1), disklab.space_params(2, 1, 0.25),
                                                    univalent_hint=True, tol=1e-4,
                                                    radii=(0.5, 0.9, 0.95, 0.99), angles=4)

    assert report.evidence['rule'] == 'm0'
    assert report.bounded_flag == 'consistent'
    assert report.compact_flag == 'consistent'


@pytest.mark.parametrize('name, compact', [('e1', 'consistent'), ('log_pole', 'inconsistent')])
def test_symbol_class_bmoa_pair(name, compact):
    """Test that on BMOA the F_log rule finds e1 compact and log(1 / (1 - z)) not"""
    report = disklab.operator_volterra_symbol_class(disklab.fn_catalogue_get(name), disklab.space_params(2, 1, 0))

    assert report.evidence['rule'] == 'f_log'
    assert report.compact_flag == compact
    if name == 'e1':
        assert report.bounded_flag == 'consistent'


def test_symbol_class_needs_admissible():
    """Test that collapsed parameters are refused"""
    with pytest.raises(ValueError, match="needs admissible"):
        disklab.operator_volterra_symbol_class(disklab.fn_monomial(1), disklab.space_params(2, 1, 0.5))


def test_bounded_verdict():
    """Test the boundedness verdict bands"""
    assert disklab._operator_bounded_verdict(_profile(-1.0)) == 'consistent'
    assert disklab._operator_bounded_verdict(_profile(0.5)) == 'inconsistent'
    assert disklab._operator_bounded_verdict(_profile(0.5), definite=False) == 'inconclusive'
    assert disklab._operator_bounded_verdict(_profile(float('nan'))) == 'inconclusive'


def test_compact_verdict():
    """Test the compactness verdict bands"""
    assert disklab._operator_compact_verdict(_profile(-1.0)) == 'consistent'
    assert disklab._operator_compact_verdict(_profile(0.0, (1.0, 1.0))) == 'inconsistent'
    assert disklab._operator_compact_verdict(_profile(0.0, (1.0, 0.1))) == 'inconclusive'
    assert disklab._operator_compact_verdict(_profile(0.5), definite=False) == 'inconclusive'


# ============================================================================
# Strong continuity
# ============================================================================

def test_flow_difference_linear():
    """Test that z∘phi_t - z = (e^-t - 1) z for G = -z"""
    spec = disklab.semigroup_generator('neg_z')

    F = disklab.operator_flow_difference(spec, disklab.fn_monomial(1), 1.0)

    assert np.allclose(F.value(POINTS), (math.exp(-1) - 1) * POINTS)
    assert np.allclose(F.derivative(POINTS), math.exp(-1) - 1)


def test_continuity_curve_linear():
    """Test that ||e1∘phi_t - e1|| = (1 - e^-t) sqrt(pi / 2) and decays as t -> 0"""
    spec = disklab.semigroup_generator('neg_z')
    params = disklab.space_params(2, 1, 0)

    curve = disklab.operator_strong_continuity_curve(spec, disklab.fn_monomial(1), params, [0, 0.01, 0.1],
                                                     tol=1e-7, radii=small_radii, angles=8)

    assert curve.times == (0.0, 0.01, 0.1)
    assert curve.norms[0] == 0.0
    for t, norm in zip(curve.times[1:], curve.norms[1:]):
        assert norm == pytest.approx((1 - math.exp(-t)) * math.sqrt(math.pi / 2), rel=1e-4)
    assert curve.slope < -0.9


def test_continuity_dichotomy_on_bmoa():
    """Test that e2 under -z decays while log(1 / (1 - z)) under rotation does not"""
    times = np.logspace(-3, -1, 5)
    params = disklab.space_preset('bmoa')

    decaying = disklab.operator_strong_continuity_curve(disklab.semigroup_generator('neg_z'), disklab.fn_monomial(2),
                                                        params, times, angles=8)
    stuck = disklab.operator_strong_continuity_curve(disklab.semigroup_generator('rot_z'), disklab.fn_log_pole(),
                                                     params, times, angles=4)

    assert decaying.slope <= -0.5
    assert min(stuck.norms) >= 0.5 * stuck.norms[-1]


def test_continuity_curve_errors():
    """Test that negative times and collapsed parameters are refused"""
    spec = disklab.semigroup_generator('neg_z')
    f = disklab.fn_monomial(1)

    with pytest.raises(ValueError, match="Times must be nonnegative"):
        disklab.operator_strong_continuity_curve(spec, f, disklab.space_params(2, 1, 0), [-0.1])
    with pytest.raises(ValueError, match="needs admissible"):
        disklab.operator_strong_continuity_curve(spec, f, disklab.space_params(2, 0.5, 0.5), [0.1])


# ============================================================================
# Witness construction
# ============================================================================

def test_witness_rejects_unknown_family():
    """Test that only the beta and midpoint families exist"""
    with pytest.raises(ValueError, match="Unknown witness family"):
        disklab.operator_witness_construct(disklab.fn_log_squared(), disklab.space_params(2, 3, 1), family='gamma')


def test_witness_beta_family_needs_alpha():
    """Test that beta_w^alpha needs alpha > 0"""
    with pytest.raises(ValueError, match="beta family needs alpha > 0"):
        disklab.operator_witness_construct(disklab.fn_log_squared(), disklab.space_params(2, 3, 0))


def test_witness_needs_admissible():
    """Test that collapsed parameters are refused"""
    with pytest.raises(ValueError, match="needs admissible"):
        disklab.operator_witness_construct(disklab.fn_log_squared(), disklab.space_params(2, 1, 0.5))


def test_witness_base_case():
    """Test that n_max = 0 returns F_0 = 1 with the full circle as I_0"""
    state = disklab.operator_witness_construct(disklab.fn_log_squared(), disklab.space_params(2, 3, 1),
                                               n_max=0, grids=SMALL_GRIDS, check_hypothesis=False)

    assert state.n == 0
    assert state.coefficients == (1.0,)
    assert state.centers == (1 + 0j,)
    assert state.arcs[0].length == 1.0
    assert state.thresholds == (1.0,)
    assert state.margins == ()
    assert state.partial_norm > 0
    assert state.norms == (state.partial_norm,)


def test_witness_two_rounds():
    """Test that two rounds for log² certify every margin on the default grids"""
    state = disklab.operator_witness_construct(disklab.fn_log_squared(),
                                               disklab.space_params(*disklab.WITNESS_ACCEPTANCE),
                                               n_max=2, check_hypothesis=False)

    assert state.n == 2
    assert len(state.coefficients) == len(state.centers) == len(state.arcs) == 3
    assert list(state.thresholds) == sorted(state.thresholds, reverse=True)
    assert state.thresholds[2] < state.thresholds[1] < 1.0
    for n, record in enumerate(state.margins, start=1):
        assert record['round'] == n
        assert record['M'] >= 2 ** n
        assert record['coefficient'] >= 0
        assert record['eq1'] >= 0
        assert record['eq2'] >= 0
        assert record['box_lower'] >= -record['slack']
        assert record['norm_cap'] >= -record['slack']
    assert all(0 < abs(w) < 1 for w in state.centers[1:])


def test_witness_arcs_uniform_and_focused():
    """Test the arc grid: one full circle, uniform centers and focus offsets"""
    grids = disklab.WitnessGrids(centers=8, focus_offsets=1)

    arcs = disklab._witness_arcs([1.0, 0.5], [0.0], grids)
    halves = [arc for arc in arcs if arc.length == 0.5]

    assert arcs[0] == disklab.ArcInterval(0.0, 1.0)
    assert len([arc for arc in arcs if arc.length == 1.0]) == 1
    assert 8 <= len(halves) <= 11


def test_witness_arcs_focused_only():
    """Test that uniform=False keeps only the offsets around each focus"""
    grids = disklab.WitnessGrids(centers=8, focus_offsets=1)

    arcs = disklab._witness_arcs([0.5], [0.0], grids, uniform=False)

    assert len(arcs) == 3
    assert sorted(arc.center_angle for arc in arcs) == pytest.approx([-math.pi / 4, 0.0, math.pi / 4])


def test_witness_arcs_skip_below_depth_floor():
    """Test that arcs shorter than the depth floor are dropped"""
    assert disklab._witness_arcs([1e-12], [0.0], disklab.WitnessGrids()) == []


# ============================================================================
# Serialization
# ============================================================================

def test_witness_to_dict_is_json_ready():
    """Test that witness states serialize to JSON"""
    state = disklab.operator_witness_construct(disklab.fn_log_squared(), disklab.space_params(2, 3, 1),
                                               n_max=0, grids=SMALL_GRIDS, check_hypothesis=False)

    data = json.loads(json.dumps(disklab.operator_witness_to_dict(state)))

    assert data['n'] == 0
    assert data['centers'] == [[1.0, 0.0]]
    assert data['arcs'] == [{'center_angle': 0.0, 'length': 1.0}]
    assert data['hypothesis'] is None


def test_symbol_class_to_dict_is_json_ready():
    """Test that symbol class reports serialize to JSON"""
    report = disklab.operator_volterra_symbol_class(disklab.fn_constant(2), disklab.space_params(2, 1, 0.25))

    data = json.loads(json.dumps(disklab.operator_symbol_class_to_dict(report)))

    assert data['bounded_flag'] == 'consistent'
    assert data['evidence']['rule'] == 'constant'
