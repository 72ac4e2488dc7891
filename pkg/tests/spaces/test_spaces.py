"""
Tests for admissibility, presets, M_alpha(D^p_s) seminorms in their three
forms, D^p_s norms, the F(p, q, s) family and weighted Bloch norms.
"""
import json
import math

import numpy as np
import pytest

import disklab
from tests.conftest import small_radii


# ============================================================================
# Parameters
# ============================================================================

@pytest.mark.parametrize('triple, admissible, classification', [
    ((2, 1, 0), True, 'proper_Malpha'),
    ((2, 1, 0.4), True, 'proper_Malpha'),
    ((2, 1, 0.5), False, 'collapsed_to_Dps'),
    ((2, 0.5, 0), True, 'proper_Malpha'),
    ((2, 0, 0), False, 'collapsed_to_Dps'),
    ((1.5, 0, 0), True, 'proper_Malpha'),
    ((1.5, -0.2, 0), False, 'invalid'),
    ((3, 1.5, 0.1), True, 'proper_Malpha'),
    ((3, 1.5, 0.2), False, 'collapsed_to_Dps'),
])
def test_admissible_check(triple, admissible, classification):
    """Test the admissibility predicate and classification together"""
    report = disklab.space_admissible_check(disklab.space_params(*triple))

    assert disklab.space_is_admissible(*triple) is admissible
    assert report.admissible is admissible
    assert report.classification == classification


def test_space_params_rejects_p():
    """Test that p <= 1 is rejected"""
    with pytest.raises(ValueError, match="p must be > 1"):
        disklab.space_params(1, 1, 0)


def test_space_params_rejects_negative_alpha():
    """Test that alpha < 0 is rejected"""
    with pytest.raises(ValueError, match="alpha"):
        disklab.space_params(2, 1, -0.1)


def test_space_presets():
    """Test the classical space presets"""
    assert disklab.space_preset('bmoa')[:3] == (2.0, 1.0, 0.0)
    assert disklab.space_preset('bmoa_p', 3)[:3] == (3.0, 2.0, 0.0)
    assert disklab.space_preset('morrey', 0.5)[:3] == (2.0, 1.0, 0.25)
    assert disklab.space_preset('bloch').s == 2.0


def test_space_preset_rejects_values():
    """Test that presets validate their parameter"""
    with pytest.raises(ValueError, match="Bloch preset"):
        disklab.space_preset('bloch', 1.0)
    with pytest.raises(ValueError, match="Unknown space preset"):
        disklab.space_preset('hardy')


# ============================================================================
# M_alpha(D^p_s) seminorms
# ============================================================================

def test_mads_seminorm_of_identity():
    """Test that the BMOA seminorm of z is sqrt(pi / 2), attained at a = 0"""
    estimate = disklab.space_mads_seminorm(disklab.fn_monomial(1), disklab.space_preset('bmoa'),
                                           tol=1e-7, radii=small_radii, angles=8)

    assert estimate.value == pytest.approx(math.sqrt(math.pi / 2), rel=5e-3)
    assert complex(estimate.profile.attained_at) == 0
    assert estimate.quadrature_meta['integrals'] > 0


def test_mads_forms_agree_at_origin():
    """Test that the invariant, kernel and box functionals coincide at a = 0"""
    params = disklab.space_params(2, 1, 0.25)
    f = disklab.fn_log_test(0.5)

    values = [disklab.space_mads_objective(f, params, form, tol=1e-8)(0j) for form in disklab.MADS_FORMS]

    assert values[1] == pytest.approx(values[0], rel=1e-6)
    assert values[2] == pytest.approx(values[0], rel=1e-6)


def _bmoa_identity_objective(a):
    # ∫ |phi_a'|² (1 - |z|²) dA = pi (1 - x) (x + (1 - x) log(1 - x)) / x², x = |a|²
    x = abs(a) ** 2
    return math.pi * (1 - x) * (x + (1 - x) * math.log(1 - x)) / x ** 2


@pytest.mark.parametrize('a', [0.5, 0.9j, -0.99, 0.995 * np.exp(1j), 0.999])
def test_mads_objective_identity_near_boundary(a):
    """Test the BMOA functional of z against its closed form up to |a| = 0.999 at the default tolerance"""
    objective = disklab.space_mads_objective(disklab.fn_monomial(1), disklab.space_preset('bmoa'))

    assert objective(complex(a)) == pytest.approx(_bmoa_identity_objective(a), rel=1e-5)


def test_mads_seminorm_of_identity_on_default_radii():
    """Test the BMOA seminorm of z on the full radii ladder at the default tolerance"""
    estimate = disklab.space_mads_seminorm(disklab.fn_monomial(1), disklab.space_preset('bmoa'), angles=4)

    assert estimate.profile.radii == disklab.SUP_RADII
    assert estimate.value == pytest.approx(math.sqrt(math.pi / 2), rel=1e-5)
    assert estimate.profile.values[-1] == pytest.approx(_bmoa_identity_objective(0.999), rel=1e-5)


@pytest.mark.parametrize('name', ['e1', 'l_0.9', 'log_pole'])
@pytest.mark.parametrize('triple', [(2, 1, 0), (2, 1, 0.25)])
def test_mads_kernel_form_equals_invariant_form(name, triple):
    """Test that the default kernel exponent reproduces the invariant functional off the origin"""
    f = disklab.fn_catalogue_get(name)
    params = disklab.space_params(*triple)
    invariant = disklab.space_mads_objective(f, params, 'invariant')
    kernel = disklab.space_mads_objective(f, params, 'kernel')

    for a in (0.5, 0.9j, -0.95, 0.999):
        assert kernel(a) == pytest.approx(invariant(a), rel=1e-5)


@pytest.mark.parametrize('name', ['e1', 'log_pole'])
def test_mads_box_seminorm_comparable(name):
    """Test that the box and invariant seminorms agree up to a bounded factor"""
    f = disklab.fn_catalogue_get(name)
    params = disklab.space_preset('bmoa')
    radii = (0.0, 0.9, 0.99, 0.999)

    invariant = disklab.space_mads_seminorm(f, params, 'invariant', radii=radii, angles=4)
    box = disklab.space_mads_seminorm(f, params, 'box', radii=radii, angles=4)

    assert 1 / 50 <= box.value / invariant.value <= 50


@pytest.mark.parametrize('name, b', [('l_0.5', 0.6), ('log_pole', -0.5j), ('e2', 0.3 + 0.3j)])
def test_mads_objective_is_mobius_invariant(name, b):
    """Test that the alpha = 0 functional of f∘phi_b at a is the functional of f at phi_b(a)"""
    f = disklab.fn_catalogue_get(name)
    params = disklab.space_preset('bmoa')
    composed = disklab.operator_compose(disklab.fn_automorphism(b), f)
    left = disklab.space_mads_objective(composed, params)
    right = disklab.space_mads_objective(f, params)

    for a in (0j, 0.5, -0.9j, 0.999):
        image, _ = disklab.disk_mobius_jet(b, a)
        assert left(a) == pytest.approx(right(complex(image)), rel=3e-6)


def test_mads_seminorm_is_mobius_invariant():
    """Test that z and phi_0.5 share the BMOA seminorm when phi_0.5(0.5) = 0 is on the ladder"""
    params = disklab.space_preset('bmoa')
    composed = disklab.operator_compose(disklab.fn_automorphism(0.5), disklab.fn_monomial(1))

    plain = disklab.space_mads_seminorm(disklab.fn_monomial(1), params, angles=8)
    moved = disklab.space_mads_seminorm(composed, params, angles=8)

    assert moved.value == pytest.approx(plain.value, rel=3e-6)
    assert complex(moved.profile.attained_at) == pytest.approx(0.5)


def test_mads_seminorm_of_constant_is_zero():
    """Test that constants have zero seminorm and a -inf trend"""
    estimate = disklab.space_mads_seminorm(disklab.fn_constant(3), disklab.space_preset('bmoa'), radii=small_radii)

    assert estimate.value == 0.0
    assert estimate.profile.slope == float('-inf')


def test_mads_seminorm_box_needs_proper_range():
    """Test that the box form is refused on collapsed parameters"""
    with pytest.raises(ValueError, match="box form"):
        disklab.space_mads_seminorm(disklab.fn_monomial(1), disklab.space_params(2, 1, 0.5), 'box')


def test_mads_seminorm_rejects_invalid():
    """Test that invalid parameters are refused"""
    with pytest.raises(ValueError, match="outside every"):
        disklab.space_mads_seminorm(disklab.fn_monomial(1), disklab.space_params(3, 0.5, 0))


def test_mads_objective_rejects_form():
    """Test that unknown forms are refused"""
    with pytest.raises(ValueError, match="Unknown seminorm form"):
        disklab.space_mads_objective(disklab.fn_monomial(1), disklab.space_preset('bmoa'), 'garsia')


def test_dps_norm_of_identity():
    """Test that ||z||_{D^2_1} = sqrt(pi / 2)"""
    estimate = disklab.space_dps_norm(disklab.fn_monomial(1), 2, 1, tol=1e-8)

    assert estimate.value == pytest.approx(math.sqrt(math.pi / 2), rel=1e-6)
    assert estimate.form == 'dps'


def test_dps_norm_adds_value_at_origin():
    """Test that the norm includes |f(0)|"""
    estimate = disklab.space_dps_norm(disklab.fn_constant(-3), 2, 1)

    assert estimate.value == pytest.approx(3.0)


# ============================================================================
# F(p, q, s) and weighted Bloch
# ============================================================================

def test_f_family_rejects_parameters():
    """Test the F(p, q, s) parameter range"""
    with pytest.raises(ValueError, match="F\\(p, q, s\\)"):
        disklab.space_f_family_objective(disklab.fn_monomial(1), 2, -3, 1)


def test_f_family_log_weight_vanishes_at_origin():
    """Test that the logarithmic factor is zero at a = 0"""
    objective = disklab.space_f_family_objective(disklab.fn_monomial(1), 2, 0, 1, log_weighted=True)

    assert objective(0j) == 0.0


def test_f_family_at_origin_matches_dps():
    """Test that F(2, 0, 1) at a = 0 is the D^2_1 integral"""
    objective = disklab.space_f_family_objective(disklab.fn_monomial(1), 2, 0, 1, tol=1e-8)

    assert objective(0j) == pytest.approx(math.pi / 2, rel=1e-6)


def test_weighted_bloch_norm_of_identity():
    """Test that sup (1 - |z|²) |1| = 1 for both standard weights"""
    power = disklab.space_weighted_bloch_norm(disklab.fn_monomial(1), 'alpha_power', 1.0, radii=small_radii, angles=4)
    log = disklab.space_weighted_bloch_norm(disklab.fn_monomial(1), 'log', radii=small_radii, angles=4)

    assert power.value == pytest.approx(1.0)
    assert log.value == pytest.approx(1.0)


def test_weighted_bloch_norm_custom_weight():
    """Test that a Weight record is accepted"""
    estimate = disklab.space_weighted_bloch_norm(disklab.fn_monomial(1), disklab.weight_constant(2.0),
                                                 radii=small_radii, angles=4)

    assert estimate.value == pytest.approx(2.0)
    assert estimate.quadrature_meta['weight'] == 'constant(2)'


def test_bloch_objective_rejects_weight():
    """Test that unknown weight names are refused"""
    with pytest.raises(ValueError, match="Unknown Bloch weight"):
        disklab.space_bloch_objective(disklab.fn_monomial(1), 'cubic')


def test_weight_regularity_constant():
    """Test C_omega for constant and power weights"""
    assert disklab.weight_regularity_constant(disklab.weight_constant()) == 0.0
    constant = disklab.weight_regularity_constant(disklab.weight_alpha_power(1.0))
    assert 1.9 < constant < 2.0


def test_weight_log_rejects_k():
    """Test that log weights need K > 1"""
    with pytest.raises(ValueError, match="K > 1"):
        disklab.weight_log(1.0)


# ============================================================================
# Selectors and serialization
# ============================================================================

def test_littleo_profile_bloch_decays():
    """Test that the little-o profile of z in the Bloch space decays"""
    selector = disklab.SpaceSelector('bloch', disklab.space_params(2, 2, 1.0))
    profile = disklab.space_littleo_profile(disklab.fn_monomial(1), selector, (0.5, 0.9, 0.99, 0.999), 4)

    assert profile.slope == pytest.approx(-1.0, abs=0.05)


def test_littleo_profile_log_pole_stays_away_from_zero():
    """Test that log(1 / (1 - z)) is not in VMOA: the BMOA profile keeps a positive floor"""
    selector = disklab.SpaceSelector('mads', disklab.space_preset('bmoa'))
    radii = (0.9, 0.95, 0.99, 0.995, 0.999)

    profile = disklab.space_littleo_profile(disklab.fn_log_pole(), selector, radii, 4)

    # On the positive axis the functional is 7.29 at 0.9 and tends to 4 pi log 2
    assert min(profile.values) >= 7.0
    assert profile.slope > -disklab.TREND_THRESHOLD


def test_mads_objective_log_pole_at_origin():
    """Test that ∫ |1 / (1 - z)|² (1 - |z|²) dA = pi"""
    objective = disklab.space_mads_objective(disklab.fn_log_pole(), disklab.space_preset('bmoa'))

    assert objective(0j) == pytest.approx(math.pi, rel=1e-5)


def test_space_objective_rejects_kind():
    """Test that unknown selector kinds are refused"""
    with pytest.raises(ValueError, match="selector kind"):
        disklab.space_objective(disklab.fn_monomial(1), disklab.SpaceSelector('hardy'))


def test_norm_to_dict_is_json_ready():
    """Test that NormEstimate serialization survives json.dumps with infinite slopes"""
    estimate = disklab.space_mads_seminorm(disklab.fn_constant(1), disklab.space_preset('bmoa'), radii=small_radii)

    data = json.loads(json.dumps(disklab.space_norm_to_dict(estimate)))

    assert data['value'] == 0.0
    assert data['profile']['slope'] == '-inf'
    assert data['profile']['radii'] == list(small_radii)
