"""
Tests for generators, the generator catalogue, flows, classification,
Koenigs maps and the vanishing Bloch condition.
"""
import json
import math

import numpy as np
import pytest

import disklab


POINTS = np.array([0.0, 0.5, -0.4j, 0.3 + 0.6j, -0.8 + 0.1j])


# ============================================================================
# Generators and the catalogue
# ============================================================================

@pytest.mark.parametrize('name', sorted(disklab.GENERATOR_CATALOGUE))
def test_catalogue_generators_build(name):
    """Test that every built-in generator resolves with its label"""
    spec = disklab.semigroup_generator(name)

    assert spec.label == name
    assert np.all(np.isfinite(spec.G.value(POINTS)))


def test_generator_unknown_name():
    """Test that unknown names are rejected"""
    with pytest.raises(ValueError, match="Unknown generator"):
        disklab.semigroup_generator('spiral')


def test_berkson_porta_matches_closed_form():
    """Test that tau = 1, p = 1 reproduces (1 - z)²"""
    spec = disklab.semigroup_generator('bp_parabolic')

    assert np.allclose(spec.G.value(POINTS), (1 - POINTS) ** 2)
    assert np.allclose(spec.G.derivative(POINTS), -2 * (1 - POINTS))


def test_catalogue_entry_checks_consistency():
    """Test that disagreeing closed form and Berkson-Porta data are rejected"""
    entry = {'closed_form_id': 'parabolic', 'berkson_porta': {'tau': [0, 0], 'p_id': 'one'}}

    with pytest.raises(ValueError, match="disagrees"):
        disklab.semigroup_catalogue_entry(entry, 'broken')


def test_catalogue_entry_merges_consistent_data():
    """Test that agreeing data keep the exact flow and gain a Herglotz function"""
    entry = {'closed_form_id': 'parabolic', 'berkson_porta': {'tau': [1, 0], 'p_id': 'one'}}

    spec = disklab.semigroup_catalogue_entry(entry, 'merged')

    assert spec.flow_exact is not None
    assert spec.herglotz is not None
    assert disklab.semigroup_check_consistency(spec) < 1e-12


def test_catalogue_entry_needs_a_form():
    """Test that an entry without closed_form_id or berkson_porta is rejected"""
    with pytest.raises(ValueError, match="closed_form_id or berkson_porta"):
        disklab.semigroup_catalogue_entry({'name': 'empty'})


def test_herglotz_constant_rejects_negative_real_part():
    """Test that the constant Herglotz function needs Re p >= 0"""
    entry = {'berkson_porta': {'tau': [0, 0], 'p_id': 'constant'}, 'parameters': {'p': [-1, 0]}}

    with pytest.raises(ValueError, match="Re p >= 0"):
        disklab.semigroup_catalogue_entry(entry, 'bad')


def test_catalogue_load(tmp_path):
    """Test that a catalogue file adds named generators"""
    path = tmp_path / 'generators.json'
    path.write_text(json.dumps({'generators': [
        {'name': 'spiral', 'berkson_porta': {'tau': [0, 0], 'p_id': 'constant'}, 'parameters': {'p': [1, 0.5]}},
    ]}), encoding='utf-8')

    catalogue = disklab.semigroup_catalogue_load(path)
    spec = disklab.semigroup_generator('spiral', catalogue)

    assert np.allclose(spec.G.value(POINTS), -(1 + 0.5j) * POINTS)


def test_catalogue_load_reports_parse_position(tmp_path):
    """Test that JSON errors carry line and column"""
    path = tmp_path / 'broken.json'
    path.write_text('{\n  "generators": [\n    {"name": }\n  ]\n}\n', encoding='utf-8')

    with pytest.raises(ValueError, match=r"broken.json:3:"):
        disklab.semigroup_catalogue_load(path)


def test_catalogue_load_needs_names(tmp_path):
    """Test that entries without a name are rejected"""
    path = tmp_path / 'nameless.json'
    path.write_text(json.dumps([{'closed_form_id': 'linear'}]), encoding='utf-8')

    with pytest.raises(ValueError, match=r"generators\[0\] needs a name"):
        disklab.semigroup_catalogue_load(path)


def test_validate_generator():
    """Test min Re p for an attracting and a repelling linear field"""
    good = disklab.semigroup_validate_generator(disklab.semigroup_generator('neg_z'))
    bad = disklab.semigroup_validate_generator(
        disklab.semigroup_generator({'closed_form_id': 'linear', 'parameters': {'c': [1, 0]}}))

    assert good.valid and good.min_re_p == pytest.approx(1.0)
    assert good.excluded_radius == disklab.KOENIGS_BALL
    assert not bad.valid and bad.min_re_p == pytest.approx(-1.0)


# ============================================================================
# Flows
# ============================================================================

def test_flow_linear_closed_form():
    """Test that G = -z gives phi_1(0.5) = 0.5 / e"""
    result = disklab.semigroup_flow(disklab.semigroup_generator('neg_z'), 0.5, 1.0)

    assert complex(result.value) == pytest.approx(0.5 * math.exp(-1), abs=1e-10)
    assert result.derivative == pytest.approx(math.exp(-1), abs=1e-10)
    assert result.steps > 0
    assert result.local_error < 1e-10


@pytest.mark.parametrize('name', ['parabolic', 'logistic', 'hyperbolic', 'rot_z'])
def test_flow_matches_exact(name):
    """Test that the integrator reproduces the closed-form flows"""
    spec = disklab.semigroup_generator(name)

    for t in (0.1, 0.5, 1.0):
        numeric, d_numeric = disklab.semigroup_flow_array(spec, POINTS, t, exact=False)
        exact, d_exact = disklab.semigroup_flow_array(spec, POINTS, t)
        assert np.max(np.abs(numeric - exact)) < 1e-8
        assert np.max(np.abs(d_numeric - d_exact)) < 1e-7


def test_flow_semigroup_law():
    """Test that phi_s(phi_t(z)) = phi_{s+t}(z)"""
    spec = disklab.semigroup_generator('bp_shifted')

    first, _ = disklab.semigroup_flow_array(spec, POINTS, 0.3)
    composed, _ = disklab.semigroup_flow_array(spec, first, 0.4)
    direct, _ = disklab.semigroup_flow_array(spec, POINTS, 0.7)

    assert np.max(np.abs(composed - direct)) < 1e-8


@pytest.mark.parametrize('name', ['bp_shifted', 'parabolic'])
@pytest.mark.parametrize('t', [0.1, 0.5, 1.0])
@pytest.mark.parametrize('s', [0.1, 0.5, 1.0])
def test_flow_semigroup_law_on_time_grid(name, t, s):
    """Test phi_t(phi_s(z)) = phi_{t+s}(z) for the integrator on every pair of times"""
    spec = disklab.semigroup_generator(name)

    inner, _ = disklab.semigroup_flow_array(spec, POINTS, s, exact=False)
    composed, _ = disklab.semigroup_flow_array(spec, inner, t, exact=False)
    direct, _ = disklab.semigroup_flow_array(spec, POINTS, t + s, exact=False)

    assert np.max(np.abs(composed - direct)) < 1e-7


def test_flow_at_time_zero():
    """Test that phi_0 is the identity"""
    result = disklab.semigroup_flow(disklab.semigroup_generator('parabolic'), 0.2j, 0.0)

    assert complex(result.value) == 0.2j
    assert result.steps == 0
    assert result.derivative == 1


def test_flow_rejects_negative_time():
    """Test that negative times are refused"""
    with pytest.raises(ValueError, match="Flow time"):
        disklab.semigroup_flow(disklab.semigroup_generator('neg_z'), 0.5, -1.0)


def test_flow_rejects_outside_point():
    """Test that the start point must be interior"""
    with pytest.raises(ValueError, match="Interior point"):
        disklab.semigroup_flow(disklab.semigroup_generator('neg_z'), 1.5, 1.0)


def test_flow_step_cap_raises_step_underflow():
    """Test that hitting the step cap raises StepUnderflow with the last state"""
    spec = disklab.semigroup_generator('parabolic')

    with pytest.raises(disklab.StepUnderflow) as info:
        disklab._semigroup_integrate(spec, np.array([0.5]), 10.0, max_steps=2)

    assert 0 < info.value.t < 10.0


# ============================================================================
# Classification and Koenigs maps
# ============================================================================

def test_classify_elliptic():
    """Test that G = -2z is elliptic at 0 with lam = 2"""
    klass = disklab.semigroup_classify(disklab.semigroup_generator('neg_2z'))

    assert klass.kind == 'elliptic'
    assert abs(complex(klass.dw_point)) < 1e-12
    assert klass.lam == pytest.approx(2.0)
    assert klass.attracting


def test_classify_rotation_is_not_attracting():
    """Test that G = iz is elliptic with Re lam = 0"""
    klass = disklab.semigroup_classify(disklab.semigroup_generator('rot_z'))

    assert klass.kind == 'elliptic'
    assert not klass.attracting


def test_classify_elliptic_interior_point():
    """Test that the Denjoy-Wolff point 0.5 is found"""
    klass = disklab.semigroup_classify(disklab.semigroup_generator('bp_shifted'))

    assert klass.kind == 'elliptic'
    assert complex(klass.dw_point) == pytest.approx(0.5, abs=1e-10)


@pytest.mark.parametrize('name', ['parabolic', 'hyperbolic'])
def test_classify_non_elliptic(name):
    """Test that boundary Denjoy-Wolff points are found by following the flow of 0"""
    klass = disklab.semigroup_classify(disklab.semigroup_generator(name))

    assert klass.kind == 'non_elliptic'
    assert klass.dw_point.boundary
    assert complex(klass.dw_point) == pytest.approx(1.0, abs=1e-3)


def test_koenigs_elliptic_conjugation():
    """Test that h(phi_t(z)) = exp(-lam t) h(z) for G = -z(1 - z)"""
    spec = disklab.semigroup_generator('logistic')
    klass = disklab.semigroup_classify(spec)
    h = disklab.semigroup_koenigs_map(spec, klass)
    z = np.array([0.05, 0.3 + 0.2j, -0.6j, 0.7])

    phi, _ = disklab.semigroup_flow_array(spec, z, 0.5)

    assert np.max(np.abs(h.value(phi) - np.exp(-klass.lam * 0.5) * h.value(z))) < 1e-8
    assert np.max(np.abs(h.value(z) - z / (1 - z))) < 1e-8


def test_koenigs_elliptic_derivative():
    """Test that the Koenigs derivative matches the exact map"""
    spec = disklab.semigroup_generator('logistic')
    h = disklab.semigroup_koenigs_map(spec)
    z = np.array([0.01, 0.5j, -0.5])

    assert np.max(np.abs(h.derivative(z) - 1 / (1 - z) ** 2)) < 1e-7


def test_koenigs_non_elliptic_translation():
    """Test that h(phi_t(z)) = h(z) + it for G = (1 - z)²"""
    spec = disklab.semigroup_generator('parabolic')
    h = disklab.semigroup_koenigs_map(spec)

    phi, _ = disklab.semigroup_flow_array(spec, POINTS, 0.5)

    assert np.max(np.abs(h.value(phi) - h.value(POINTS) - 0.5j)) < 1e-8
    assert h.value(0.5) == pytest.approx(1j)


@pytest.mark.parametrize('t', [0.1, 1.0])
def test_koenigs_conjugation_on_time_grid(t):
    """Test both Koenigs identities away from t = 0.5"""
    z = np.array([0.05, 0.3 + 0.2j, -0.6j, 0.7])
    spec = disklab.semigroup_generator('neg_2z')
    klass = disklab.semigroup_classify(spec)
    h = disklab.semigroup_koenigs_map(spec, klass)
    phi, _ = disklab.semigroup_flow_array(spec, z, t)

    assert np.max(np.abs(h.value(phi) - np.exp(-klass.lam * t) * h.value(z))) < 1e-6

    spec = disklab.semigroup_generator('parabolic')
    h = disklab.semigroup_koenigs_map(spec)
    phi, _ = disklab.semigroup_flow_array(spec, z, t)

    assert np.max(np.abs(h.value(phi) - h.value(z) - 1j * t)) < 1e-6


def test_koenigs_trivial_semigroup():
    """Test that G = 0 has no Koenigs map"""
    spec = disklab.generator_from_closed_form('zero', disklab.fn_constant(0))

    with pytest.raises(ValueError, match="trivial"):
        disklab.semigroup_koenigs_map(spec)


def test_gamma_symbol_linear():
    """Test that gamma(z) = -z for G = -z"""
    gamma = disklab.semigroup_gamma_symbol(disklab.semigroup_generator('neg_z'))

    assert gamma.value(0.3 + 0.1j) == pytest.approx(-(0.3 + 0.1j))
    assert gamma.derivative(0.3) == pytest.approx(-1.0)
    assert gamma.derivative(0.0) == pytest.approx(-1.0)


def test_gamma_symbol_logistic():
    """Test that gamma(z) = log(1 - z) for G = -z(1 - z)"""
    gamma = disklab.semigroup_gamma_symbol(disklab.semigroup_generator('logistic'))

    assert gamma.value(0.5) == pytest.approx(math.log(0.5), abs=1e-9)
    assert gamma.value(0j) == 0


def test_gamma_symbol_non_elliptic_is_koenigs():
    """Test that gamma = h = iz / (1 - z) for G = (1 - z)²"""
    gamma = disklab.semigroup_gamma_symbol(disklab.semigroup_generator('parabolic'))

    assert gamma.value(0.5) == pytest.approx(1j, abs=1e-9)


def test_generator_is_flow_velocity():
    """Test that (phi_t(z) - z) / t approaches G(z) as t goes to 0"""
    spec = disklab.semigroup_generator('hyperbolic')

    phi, _ = disklab.semigroup_flow_array(spec, POINTS, 1e-6)

    assert np.max(np.abs((phi - POINTS) / 1e-6 - spec.G.value(POINTS))) < 1e-4


def test_log_koenigs_parabolic():
    """Test that H(0) = i pi / 2 for the parabolic generator"""
    H = disklab.semigroup_log_koenigs('parabolic')

    assert H.value(0j) == pytest.approx(0.5j * math.pi)


# ============================================================================
# Vanishing Bloch condition
# ============================================================================

def test_bloch_profile_parabolic_closed_form():
    """Test that sup (1 - |z|²) / |1 - z|² = (1 + r) / (1 - r) and the condition fails"""
    profile = disklab.semigroup_bloch_condition_profile(disklab.semigroup_generator('parabolic'))
    values = dict(zip(profile.radii, profile.values))

    assert values[0.9] == pytest.approx(19.0, rel=1e-9)
    assert values[0.99] == pytest.approx(199.0, rel=1e-9)
    assert disklab.semigroup_bloch_verdict(profile) == 'fails'


@pytest.mark.parametrize('name', ['neg_z', 'rot_z'])
@pytest.mark.parametrize('log_weighted', [False, True])
def test_bloch_profile_linear_holds(name, log_weighted):
    """Test that the condition holds for linear generators"""
    profile = disklab.semigroup_bloch_condition_profile(disklab.semigroup_generator(name), log_weighted)

    assert disklab.semigroup_bloch_verdict(profile) == 'holds'


def test_bloch_profile_excludes_denjoy_wolff_neighbourhood():
    """Test that circles through an interior Denjoy-Wolff point are skipped"""
    profile = disklab.semigroup_bloch_condition_profile(disklab.semigroup_generator('bp_shifted'),
                                                        radii=(0.5, 0.9, 0.99), angles=64)

    assert profile.excluded == (0.5,)
    assert profile.radii == (0.9, 0.99)


def test_bloch_verdict_thresholds():
    """Test the trend verdict bands"""
    def profile(slope):
        return disklab.SupProfile((0.9,), (1.0,), 1.0, disklab.disk_point(0), slope)

    assert disklab.semigroup_bloch_verdict(profile(-1.0)) == 'holds'
    assert disklab.semigroup_bloch_verdict(profile(1.0)) == 'fails'
    assert disklab.semigroup_bloch_verdict(profile(0.0)) == 'inconclusive'
