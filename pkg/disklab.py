#!/usr/bin/env python3
"""
disklab - A numerical laboratory for semigroups of analytic self-maps of the
unit disk, the Möbius-invariant spaces M_alpha(D^p_s), composition operators
and generalized Volterra operators.
"""
import argparse
import csv
import json
import math
import os
import platform
import sys
import time
from collections import namedtuple
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.polynomial import polynomial as P
from numpy.polynomial.legendre import leggauss


__version__ = '0.1.0'

# Conventions shared by every report. Arc length is normalized so that the
# whole circle has length one, and dA is the unnormalized area measure.
CONVENTIONS = {
    'area_measure': 'Lebesgue, A(D) = pi',
    'arc_normalization': '|T| = 1, |I| = angle / (2 pi)',
    'box': 'S(I) = {z != 0 : 1 - |z| < |I|, z/|z| in I}',
    'box_of_point': 'S(a) = S(I_a), I_a centered at a/|a| with |I_a| = 1 - |a|; S(0) = D',
}


### DISK GEOMETRY ###

class DiskPoint(namedtuple('DiskPoint', ['re', 'im', 'boundary'])):
    """A point of the closed unit disk.

    Interior points satisfy re² + im² < 1. Boundary points are normalized to
    modulus one on construction and carry boundary=True.
    """
    __slots__ = ()

    def __complex__(self):
        return complex(self.re, self.im)


# center_angle in (-pi, pi], length in (0, 1] with the full circle at 1
ArcInterval = namedtuple('ArcInterval', ['center_angle', 'length'])

CarlesonBox = namedtuple('CarlesonBox', ['arc'])


def disk_point(z, boundary: bool = False) -> DiskPoint:
    """Build a DiskPoint from a complex number.

    Args:
        z: Complex coordinate
        boundary: Normalize onto the unit circle instead of checking |z| < 1

    Returns:
        DiskPoint

    Example:
        >>> disk_point(1 + 1j, boundary=True)
        DiskPoint(re=0.7071067811865475, im=0.7071067811865475, boundary=True)
    """
    z = disk_as_complex(z)
    modulus = abs(z)
    if boundary:
        if modulus == 0:
            raise ValueError("Boundary point needs a nonzero direction")
        z = z / modulus
        return DiskPoint(z.real, z.imag, True)
    if not modulus < 1:
        raise ValueError(f"Interior point must satisfy |z| < 1, got |z| = {modulus!r}")
    return DiskPoint(z.real, z.imag, False)


def disk_as_complex(point) -> complex:
    """Coerce a DiskPoint, an [re, im] pair or a number to complex."""
    if isinstance(point, DiskPoint):
        return complex(point.re, point.im)
    if isinstance(point, (list, tuple)):
        if len(point) != 2:
            raise ValueError(f"Expected an [re, im] pair, got {point!r}")
        return complex(float(point[0]), float(point[1]))
    return complex(point)


def _disk_as_input(z):
    if isinstance(z, np.ndarray):
        return z.astype(complex)
    return disk_as_complex(z)


def disk_mobius_jet(a, z) -> Tuple[Any, Any]:
    """Evaluate the involution phi_a(z) = (a - z) / (1 - conj(a) z) and its derivative.

    Works on scalars and on numpy arrays of z.

    Args:
        a: Interior point
        z: Point(s) of the closed disk

    Returns:
        (value, derivative) with derivative = (|a|² - 1) / (1 - conj(a) z)²

    Example:
        >>> disk_mobius_jet(0.5, 0.25)[0]
        (0.2857142857142857+0j)
    """
    a = disk_as_complex(a)
    if not abs(a) < 1:
        raise ValueError(f"Automorphism center must be interior, got |a| = {abs(a)!r}")
    z = _disk_as_input(z)
    denominator = 1 - a.conjugate() * z
    value = (a - z) / denominator
    derivative = (abs(a) ** 2 - 1) / denominator ** 2
    return value, derivative


def disk_mobius_focus(a, q) -> complex:
    """phi_a(q) for a point q outside the disk; infinite at the pole 1 / conj(a)."""
    a = disk_as_complex(a)
    q = complex(q)
    if not (math.isfinite(q.real) and math.isfinite(q.imag)):
        return 1 / a.conjugate() if a != 0 else complex(math.inf)
    denominator = 1 - a.conjugate() * q
    if denominator == 0:
        return complex(math.inf)
    return (a - q) / denominator


def disk_hyperbolic_distance(z, w) -> float:
    """Hyperbolic distance (1/2) log((1 + rho) / (1 - rho)) with rho = |phi_z(w)|."""
    z = disk_as_complex(z)
    w = disk_as_complex(w)
    if not (abs(z) < 1 and abs(w) < 1):
        raise ValueError(f"Hyperbolic distance needs interior points, got {z!r} and {w!r}")
    if z == w:
        return 0.0
    rho = abs(disk_mobius_jet(z, w)[0])
    return math.atanh(min(rho, 1.0 - 1e-16))


def disk_hyperbolic_midpoint(w) -> complex:
    """The point on the segment [0, w] halfway from 0 in the hyperbolic metric."""
    w = disk_as_complex(w)
    modulus = abs(w)
    if not modulus < 1:
        raise ValueError(f"Midpoint needs an interior point, got |w| = {modulus!r}")
    return w / (1 + math.sqrt(1 - modulus * modulus))


def arc_create(center_angle: float, length: float) -> ArcInterval:
    """Create an arc, normalizing the center into (-pi, pi]."""
    if not 0 < length <= 1:
        raise ValueError(f"Arc length must be in (0, 1], got {length!r}")
    angle = math.remainder(float(center_angle), 2 * math.pi)
    if angle <= -math.pi:
        angle += 2 * math.pi
    return ArcInterval(angle, float(length))


def arc_angles(arc: ArcInterval) -> Tuple[float, float]:
    """Return the (start, end) angles of an arc."""
    half = math.pi * arc.length
    return arc.center_angle - half, arc.center_angle + half


def arc_contains(arc: ArcInterval, zeta) -> Any:
    """Test whether boundary direction(s) zeta lie on the open arc."""
    zeta = _disk_as_input(zeta)
    if arc.length >= 1:
        return np.ones(np.shape(zeta), dtype=bool) if isinstance(zeta, np.ndarray) else True
    offset = np.angle(zeta) - arc.center_angle
    offset = np.abs(np.remainder(offset + np.pi, 2 * np.pi) - np.pi)
    inside = offset < math.pi * arc.length
    return inside if isinstance(zeta, np.ndarray) else bool(inside)


def box_contains(box: CarlesonBox, z) -> Any:
    """Membership in S(I) = {z != 0 : 1 - |z| < |I|, z/|z| in I}."""
    z = _disk_as_input(z)
    modulus = np.abs(z)
    depth_ok = (modulus > 0) & (modulus < 1) & (1 - modulus < box.arc.length)
    direction = np.where(modulus > 0, z / np.where(modulus > 0, modulus, 1), 1)
    inside = depth_ok & arc_contains(box.arc, direction)
    return inside if isinstance(z, np.ndarray) else bool(inside)


def disk_box_of_point(a) -> CarlesonBox:
    """Carleson box S(a): arc centered at arg(a) with length 1 - |a|; S(0) is the disk.

    Example:
        >>> disk_box_of_point(0.9).arc
        ArcInterval(center_angle=0.0, length=0.09999999999999998)
    """
    a = disk_as_complex(a)
    modulus = abs(a)
    if not modulus < 1:
        raise ValueError(f"Box center must be interior, got |a| = {modulus!r}")
    if modulus == 0:
        return CarlesonBox(ArcInterval(0.0, 1.0))
    return CarlesonBox(arc_create(math.atan2(a.imag, a.real), 1 - modulus))


### ANALYTIC FUNCTIONS ###
# Using namedtuple instead of class. `value` and `derivative` are callables
# taking a complex scalar or a numpy array. Taylor forms also carry their
# coefficients; closed forms carry coefficients=None and are exact on the disk.

# foci: exterior points q (|q| >= 1) near which |f'| peaks; the cubature grades
# its angular grid toward arg q down to the scale |q| - 1.
AnalyticFn = namedtuple(
    'AnalyticFn',
    ['label', 'value', 'derivative', 'coefficients', 'tail_bound', 'radius', 'foci'],
    defaults=[()],
)

TestFunctionSpec = namedtuple(
    'TestFunctionSpec',
    ['kind', 'w', 'n', 'alpha', 'lam', 'params', 'generator', 'w0'],
    defaults=[0j, 0, 0.0, 0.0, None, None, None],
)

UnivalenceReport = namedtuple('UnivalenceReport', ['injective_on_mesh', 'first_collision', 'points_checked'])

TAYLOR_ORDER = 256
TAYLOR_RADIUS = 0.999
COMPOSE_SAFETY = 0.999

TEST_FUNCTION_KINDS = ('monomial', 'log_test', 'power_test', 'beta_test', 'koenigs_log', 'midpoint_log')


def fn_from_taylor(coefficients, label: str = 'taylor', tail_bound: float = 0.0,
                   radius: Optional[float] = None, foci: Sequence[complex] = ()) -> AnalyticFn:
    """Build a Taylor form from coefficients c_0..c_N.

    Args:
        coefficients: Sequence of complex coefficients
        label: Human readable name
        tail_bound: Bound on the truncated tail over |z| <= radius
        radius: Working radius; polynomials (tail_bound == 0) default to 1
        foci: Exterior points where the represented function is singular

    Returns:
        AnalyticFn in Taylor form
    """
    coefficients = np.array(coefficients, dtype=complex)
    if coefficients.ndim != 1 or len(coefficients) == 0:
        raise ValueError("Taylor coefficients must be a non-empty sequence")
    if tail_bound < 0:
        raise ValueError(f"Tail bound must be nonnegative, got {tail_bound!r}")
    if radius is None:
        radius = 1.0 if tail_bound == 0 else TAYLOR_RADIUS
    if len(coefficients) > 1:
        derivative_coefficients = P.polyder(coefficients)
    else:
        derivative_coefficients = np.zeros(1, dtype=complex)

    def value(z):
        return P.polyval(_disk_as_input(z), coefficients)

    def derivative(z):
        return P.polyval(_disk_as_input(z), derivative_coefficients)

    return AnalyticFn(label, value, derivative, coefficients, float(tail_bound), float(radius), fn_foci(foci))


def fn_from_closed_form(label: str, value: Callable, derivative: Callable,
                        foci: Sequence[complex] = ()) -> AnalyticFn:
    """Build an exact evaluator from value and derivative callables."""
    return AnalyticFn(label, value, derivative, None, 0.0, 1.0, fn_foci(foci))


def fn_foci(points: Iterable) -> Tuple[complex, ...]:
    """Normalize singular points: drop interior or infinite ones and near duplicates."""
    result = []
    for q in points:
        q = complex(q)
        if not (math.isfinite(q.real) and math.isfinite(q.imag)) or abs(q) < 1 - 1e-9:
            continue
        q = q / abs(q) if abs(q) < 1 else q
        if all(abs(q - other) > 1e-15 for other in result):
            result.append(q)
    return tuple(result)


def fn_exterior_pole(w: complex) -> complex:
    """The point 1 / conj(w) where 1 - conj(w) z vanishes; infinite for w = 0."""
    return complex(math.inf) if w == 0 else 1 / w.conjugate()


def fn_constant(c) -> AnalyticFn:
    c = disk_as_complex(c)
    return fn_from_taylor([c], label=f'constant({c.real:g}{c.imag:+g}j)')


def fn_monomial(n: int) -> AnalyticFn:
    """e_n(z) = z^n."""
    if n < 0 or int(n) != n:
        raise ValueError(f"Monomial degree must be a nonnegative integer, got {n!r}")
    coefficients = np.zeros(int(n) + 1, dtype=complex)
    coefficients[-1] = 1
    return fn_from_taylor(coefficients, label=f'e{int(n)}')


def fn_is_constant(f: AnalyticFn) -> bool:
    """Detect constants, exactly for Taylor forms and on a sample grid otherwise."""
    if f.coefficients is not None:
        return bool(np.all(f.coefficients[1:] == 0))
    sample = _fn_sample_grid(0.95, 8, 16)
    return bool(np.all(np.abs(f.derivative(sample)) == 0))


def _fn_sample_grid(radius: float, rings: int, angles: int) -> np.ndarray:
    radii = radius * np.arange(1, rings + 1) / rings
    theta = 2 * np.pi * np.arange(angles) / angles
    return np.concatenate([[0j], (radii[:, None] * np.exp(1j * theta[None, :])).ravel()])


def _fn_check_center(w) -> complex:
    w = disk_as_complex(w)
    if not abs(w) < 1:
        raise ValueError(f"Test function center must be interior, got |w| = {abs(w)!r}")
    return w


def fn_log_test(w) -> AnalyticFn:
    """l_w(z) = log(e / (1 - conj(w) z)), principal branch."""
    w = _fn_check_center(w)
    wbar = w.conjugate()

    def value(z):
        return 1 - np.log(1 - wbar * _disk_as_input(z))

    def derivative(z):
        return wbar / (1 - wbar * _disk_as_input(z))

    return fn_from_closed_form(f'l_{_fn_format_point(w)}', value, derivative, foci=[fn_exterior_pole(w)])


def fn_power_test(w, alpha: float, lam: float) -> AnalyticFn:
    """f_{w,alpha,lambda}(z) = (1 - |w|²)^lambda / (1 - conj(w) z)^(alpha + lambda)."""
    w = _fn_check_center(w)
    if alpha < 0:
        raise ValueError(f"alpha must be nonnegative, got {alpha!r}")
    if lam <= 0:
        raise ValueError(f"lambda must be positive, got {lam!r}")
    wbar = w.conjugate()
    scale = (1 - abs(w) ** 2) ** lam
    exponent = alpha + lam

    def value(z):
        return scale * (1 - wbar * _disk_as_input(z)) ** (-exponent)

    def derivative(z):
        return exponent * wbar * scale * (1 - wbar * _disk_as_input(z)) ** (-exponent - 1)

    return fn_from_closed_form(f'f_{_fn_format_point(w)}_{alpha:g}_{lam:g}', value, derivative,
                               foci=[fn_exterior_pole(w)])


def fn_beta_lambda(params) -> float:
    """Exponent lambda = (s - (p - 2)) / p - alpha used by the beta test functions."""
    return (params.s - (params.p - 2)) / params.p - params.alpha


def fn_beta_test(w, params) -> AnalyticFn:
    """beta_w^alpha = f_{w,alpha,lambda} with lambda = (s - (p - 2)) / p - alpha."""
    lam = fn_beta_lambda(params)
    if lam <= 0:
        raise ValueError(f"beta test function needs lambda > 0, got {lam!r} for {tuple(params[:3])}")
    f = fn_power_test(w, params.alpha, lam)
    return f._replace(label=f'beta_{_fn_format_point(disk_as_complex(w))}')


def fn_midpoint_log(w) -> AnalyticFn:
    """beta_w(z) = log(e / (1 - conj(w) phi_{w*}(z))) with w* the hyperbolic midpoint of 0 and w."""
    w = _fn_check_center(w)
    wbar = w.conjugate()
    middle = disk_hyperbolic_midpoint(w)

    def value(z):
        phi, _ = disk_mobius_jet(middle, _disk_as_input(z))
        return 1 - np.log(1 - wbar * phi)

    def derivative(z):
        phi, dphi = disk_mobius_jet(middle, _disk_as_input(z))
        return wbar * dphi / (1 - wbar * phi)

    # phi_{w*} is an involution, so the pole of the outer log sits at phi_{w*}(1 / conj(w))
    foci = [disk_mobius_focus(middle, fn_exterior_pole(w))]
    return fn_from_closed_form(f'midlog_{_fn_format_point(w)}', value, derivative, foci=foci)


def fn_log_pole() -> AnalyticFn:
    """log(1 / (1 - z)), the model BMOA function outside VMOA."""
    def value(z):
        return -np.log(1 - _disk_as_input(z))

    def derivative(z):
        return 1 / (1 - _disk_as_input(z))

    return fn_from_closed_form('log_pole', value, derivative, foci=[1])


def fn_log_squared() -> AnalyticFn:
    """log²(e / (1 - z)): outside the Bloch space, inside every M_beta(D^2_s), s > 1, beta > 0."""
    def value(z):
        return (1 - np.log(1 - _disk_as_input(z))) ** 2

    def derivative(z):
        z = _disk_as_input(z)
        return 2 * (1 - np.log(1 - z)) / (1 - z)

    return fn_from_closed_form('log_squared', value, derivative, foci=[1])


def fn_koebe() -> AnalyticFn:
    """Koebe function z / (1 - z)²."""
    def value(z):
        z = _disk_as_input(z)
        return z / (1 - z) ** 2

    def derivative(z):
        z = _disk_as_input(z)
        return (1 + z) / (1 - z) ** 3

    return fn_from_closed_form('koebe', value, derivative, foci=[1])


def fn_automorphism(b) -> AnalyticFn:
    """The disk involution phi_b(z) = (b - z) / (1 - conj(b) z)."""
    b = _fn_check_center(b)

    def value(z):
        return disk_mobius_jet(b, z)[0]

    def derivative(z):
        return disk_mobius_jet(b, z)[1]

    return fn_from_closed_form(f'phi_{_fn_format_point(b)}', value, derivative, foci=[fn_exterior_pole(b)])


def fn_log_koenigs(h: AnalyticFn, w0) -> AnalyticFn:
    """H = log(h - w0) for a Koenigs map h and w0 outside the closure of h(D).

    The principal branch is used; H' = h' / (h - w0).
    """
    w0 = disk_as_complex(w0)
    sample = h.value(_fn_sample_grid(0.99, 16, 64))
    if np.min(np.abs(sample - w0)) < 1e-12:
        raise ValueError(f"w0 = {w0!r} lies in the image of {h.label}")

    def value(z):
        return np.log(h.value(z) - w0)

    def derivative(z):
        return h.derivative(z) / (h.value(z) - w0)

    return fn_from_closed_form(f'log_koenigs({h.label})', value, derivative, foci=h.foci)


def _fn_format_point(w: complex) -> str:
    if w.imag == 0:
        return f'{w.real:g}'
    return f'{w.real:g}{w.imag:+g}j'


def fn_make_test(spec: TestFunctionSpec) -> AnalyticFn:
    """Build a test function from its spec.

    Kinds: monomial (n), log_test (w), power_test (w, alpha, lam),
    beta_test (w, params), koenigs_log (generator, w0), midpoint_log (w).

    Raises:
        ValueError: Unknown kind or parameters out of range
    """
    if spec.kind not in TEST_FUNCTION_KINDS:
        raise ValueError(f"Unknown test function kind: {spec.kind!r}")
    if spec.alpha < 0:
        raise ValueError(f"alpha must be nonnegative, got {spec.alpha!r}")
    if spec.kind == 'monomial':
        return fn_monomial(spec.n)
    elif spec.kind == 'log_test':
        return fn_log_test(spec.w)
    elif spec.kind == 'power_test':
        return fn_power_test(spec.w, spec.alpha, spec.lam)
    elif spec.kind == 'beta_test':
        if spec.params is None:
            raise ValueError("beta_test needs space parameters")
        return fn_beta_test(spec.w, spec.params)
    elif spec.kind == 'midpoint_log':
        return fn_midpoint_log(spec.w)
    else:
        generator = spec.generator if spec.generator is not None else 'parabolic'
        w0 = spec.w0 if spec.w0 is not None else -1j
        return semigroup_log_koenigs(generator, w0)


def fn_taylor_compose(f: AnalyticFn, g: AnalyticFn) -> AnalyticFn:
    """Taylor form of f∘g by Horner's scheme on truncated power series.

    The order is min(TAYLOR_ORDER, deg f * deg g). The tail bound adds the
    tails of both inputs to the measured gap between the truncated series and
    the direct evaluation f(g(z)) on the working circle.

    Raises:
        ValueError: Non-Taylor input, or g leaves the disk where f is valid
    """
    if f.coefficients is None or g.coefficients is None:
        raise ValueError("Taylor composition needs both functions in Taylor form")
    sample_radius = min(g.radius, TAYLOR_RADIUS)
    theta = 2 * np.pi * np.arange(256) / 256
    circle = sample_radius * np.exp(1j * theta)
    image = g.value(circle)
    reach = float(np.max(np.abs(image)))
    if reach > f.radius or not abs(g.coefficients[0]) < 1:
        raise ValueError(f"Composition radius violation: |g| reaches {reach:.6g} > {f.radius:g}")

    degree_f = len(f.coefficients) - 1
    degree_g = len(g.coefficients) - 1
    order = min(TAYLOR_ORDER, degree_f * degree_g)
    result = np.array([f.coefficients[-1]], dtype=complex)
    for c in f.coefficients[-2::-1]:
        result = np.convolve(result, g.coefficients)[:order + 1]
        result[0] += c
    if len(result) < order + 1:
        result = np.concatenate([result, np.zeros(order + 1 - len(result), dtype=complex)])

    truncated = order < degree_f * degree_g
    lipschitz = float(np.max(np.abs(f.derivative(image)))) if g.tail_bound > 0 else 0.0
    gap = 0.0
    if truncated or f.tail_bound > 0 or g.tail_bound > 0:
        gap = float(np.max(np.abs(P.polyval(circle, result) - f.value(image))))
    tail_bound = f.tail_bound + lipschitz * g.tail_bound + gap
    radius = g.radius if tail_bound == 0 else min(g.radius, TAYLOR_RADIUS)
    return fn_from_taylor(result, label=f'{f.label}∘{g.label}', tail_bound=tail_bound, radius=radius)


def fn_univalence_probe(f: AnalyticFn, mesh_density: int = 64) -> UnivalenceReport:
    """Check that f takes pairwise distinct values on a hyperbolic mesh.

    Rings are equally spaced in hyperbolic radius; angle counts are even so
    that z and -z are both mesh points. Collisions are found by hashing
    rounded values. A heuristic certificate only.

    Args:
        f: Function to test
        mesh_density: Maximum number of angles per ring

    Returns:
        UnivalenceReport(injective_on_mesh, first_collision, points_checked)
    """
    if mesh_density < 8:
        raise ValueError(f"mesh_density must be at least 8, got {mesh_density!r}")
    r_max = min(f.radius, 0.99)
    rings = max(4, mesh_density // 8)
    step = math.atanh(r_max) / rings
    points = [np.array([0j])]
    for k in range(1, rings + 1):
        circumference = 2 * math.pi * math.sinh(2 * k * step) / 2
        count = int(min(mesh_density, max(8, circumference / step)))
        count += count % 2
        theta = 2 * np.pi * np.arange(count) / count
        points.append(math.tanh(k * step) * np.exp(1j * theta))
    mesh = np.concatenate(points)
    values = np.asarray(f.value(mesh), dtype=complex)

    eps = 1e-9 * max(1.0, float(np.median(np.abs(values))))
    buckets = {}
    for index, v in enumerate(values):
        key = (int(round(v.real / eps)), int(round(v.imag / eps)))
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                for other in buckets.get((key[0] + dx, key[1] + dy), ()):
                    if abs(values[other] - v) < eps:
                        return UnivalenceReport(False, (complex(mesh[other]), complex(mesh[index])), index + 1)
        buckets.setdefault(key, []).append(index)
    return UnivalenceReport(True, None, len(mesh))


def fn_write_coefficients(f: AnalyticFn, path) -> None:
    """Write a Taylor form as 'index re im' lines."""
    if f.coefficients is None:
        raise ValueError(f"{f.label} is not in Taylor form")
    path = Path(path)
    with open(path, 'w', encoding='utf-8') as handle:
        handle.write(f'# {f.label} tail_bound={float(f.tail_bound)!r} radius={float(f.radius)!r}\n')
        for index, c in enumerate(f.coefficients):
            handle.write(f'{index} {float(c.real)!r} {float(c.imag)!r}\n')


def fn_read_coefficients(path, label: Optional[str] = None) -> AnalyticFn:
    """Read a coefficient list written by fn_write_coefficients.

    Lines starting with '#' are comments; missing indices are zero.
    """
    path = Path(path)
    entries = {}
    tail_bound = 0.0
    radius = None
    with open(path, 'r', encoding='utf-8') as handle:
        for number, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            if line.startswith('#'):
                for token in line[1:].split():
                    if token.startswith('tail_bound='):
                        tail_bound = float(token.split('=', 1)[1])
                    elif token.startswith('radius='):
                        radius = float(token.split('=', 1)[1])
                continue
            parts = line.split()
            if len(parts) != 3:
                raise ValueError(f"{path}:{number}: expected 'index re im', got {line!r}")
            entries[int(parts[0])] = complex(float(parts[1]), float(parts[2]))
    if not entries:
        raise ValueError(f"{path}: no coefficients")
    coefficients = np.zeros(max(entries) + 1, dtype=complex)
    for index, c in entries.items():
        coefficients[index] = c
    return fn_from_taylor(coefficients, label=label or path.stem, tail_bound=tail_bound, radius=radius)


# The six functions used for norm comparisons and composition bounds
NORM_CATALOGUE = ('e1', 'e2', 'e3', 'l_0.5', 'l_0.9', 'f_0.9_0_0.5')


def fn_catalogue_get(name: str) -> AnalyticFn:
    """Look up a named function: e<n>, l_<w>, f_<w>_<alpha>_<lambda>, phi_<b>, log_pole, log_squared, koebe, constant_<c>."""
    if name == 'log_pole':
        return fn_log_pole()
    if name == 'log_squared':
        return fn_log_squared()
    if name == 'koebe':
        return fn_koebe()
    try:
        if name.startswith('e') and name[1:].isdigit():
            return fn_monomial(int(name[1:]))
        if name.startswith('constant_'):
            return fn_constant(float(name[len('constant_'):]))
        if name.startswith('l_'):
            return fn_log_test(float(name[2:]))
        if name.startswith('phi_'):
            return fn_automorphism(float(name[4:]))
        if name.startswith('f_'):
            w, alpha, lam = (float(part) for part in name[2:].split('_'))
            return fn_power_test(w, alpha, lam)
    except ValueError as e:
        raise ValueError(f"Bad function name {name!r}: {e}")
    raise ValueError(f"Unknown function name: {name!r}")


def fn_combine(terms: Sequence[Tuple[complex, AnalyticFn]], label: Optional[str] = None) -> AnalyticFn:
    """Linear combination sum c_k f_k; stays a Taylor form when every term is one."""
    terms = [(complex(c), f) for c, f in terms]
    if not terms:
        raise ValueError("Linear combination needs at least one term")
    label = label or ' + '.join(f'{c.real:g}*{f.label}' if c.imag == 0 else f'({c:g})*{f.label}' for c, f in terms)
    if all(f.coefficients is not None for _, f in terms):
        size = max(len(f.coefficients) for _, f in terms)
        coefficients = np.zeros(size, dtype=complex)
        for c, f in terms:
            coefficients[:len(f.coefficients)] += c * f.coefficients
        tail_bound = sum(abs(c) * f.tail_bound for c, f in terms)
        radius = min(f.radius for _, f in terms)
        return fn_from_taylor(coefficients, label=label, tail_bound=tail_bound, radius=radius,
                              foci=[q for _, f in terms for q in f.foci])

    def value(z):
        return sum(c * f.value(z) for c, f in terms)

    def derivative(z):
        return sum(c * f.derivative(z) for c, f in terms)

    return fn_from_closed_form(label, value, derivative, foci=[q for _, f in terms for q in f.foci])


### QUADRATURE ###
# Global adaptive cubature on cells in (rho, theta) with rho = 1 - |z|. The
# initial grid is geometric toward the boundary (ratio 1/2) and, in angle,
# geometric toward the foci of the integrand; each cell gets a 7x7
# Gauss-Legendre tensor rule and the 4x4 rule as error estimate. The strip
# rho < QUADRATURE_DEPTH * rho_max is replaced by a geometric tail.

QuadratureResult = namedtuple('QuadratureResult', ['value', 'error_bound', 'cells_used', 'max_radius_reached'])

SupProfile = namedtuple(
    'SupProfile',
    ['radii', 'values', 'global_sup', 'attained_at', 'slope', 'excluded'],
    defaults=[float('nan'), ()],
)

QUADRATURE_TOL = 1e-6
QUADRATURE_MAX_CELLS = 60000
QUADRATURE_ATOL = 1e-14
QUADRATURE_DEPTH = 1e-6
SUP_RADII = (0.0, 0.25, 0.5, 0.75, 0.9, 0.95, 0.99, 0.995, 0.999)
SUP_ANGLES = 64
TREND_FROM = 0.9

_GAUSS_HIGH = leggauss(7)
_GAUSS_LOW = leggauss(4)


class NonConvergent(ValueError):
    """Refinement stopped before reaching the tolerance; carries the partial result."""

    def __init__(self, message: str, result: QuadratureResult):
        super().__init__(message)
        self.result = result


class ObjectiveFailure(ValueError):
    """An objective evaluation failed inside a supremum search; carries the point."""

    def __init__(self, message: str, point: complex):
        super().__init__(message)
        self.point = point


def _quadrature_evaluate(integrand: Callable, s_weight: float, cells: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    rho_mid = 0.5 * (cells[:, 0] + cells[:, 1])
    rho_half = 0.5 * (cells[:, 1] - cells[:, 0])
    theta_mid = 0.5 * (cells[:, 2] + cells[:, 3])
    theta_half = 0.5 * (cells[:, 3] - cells[:, 2])
    estimates = []
    for nodes, weights in (_GAUSS_HIGH, _GAUSS_LOW):
        rho = rho_mid[:, None] + rho_half[:, None] * nodes
        theta = theta_mid[:, None] + theta_half[:, None] * nodes
        radius = 1.0 - rho
        z = radius[:, :, None] * np.exp(1j * theta[:, None, :])
        values = np.broadcast_to(np.asarray(integrand(z), dtype=float), z.shape)
        finite = np.isfinite(values)
        if not finite.all():
            bad = complex(z[~finite][0])
            raise ValueError(f"Integrand is not finite at z = {bad!r}")
        radial = weights * rho_half[:, None] * radius * (rho * (2.0 - rho)) ** s_weight
        angular = weights * theta_half[:, None]
        estimates.append(np.einsum('mi,mij,mj->m', radial, values, angular))
    high, low = estimates
    return high, np.abs(high - low)


def _quadrature_ring(cells: np.ndarray, values: np.ndarray, lo: float, hi: float) -> float:
    inside = (cells[:, 0] >= lo * (1 - 1e-12)) & (cells[:, 0] < hi * (1 - 1e-12))
    return float(np.sum(values[inside]))


def _quadrature_tail(cells: np.ndarray, values: np.ndarray, rho_min: float, s_weight: float) -> Tuple[float, float]:
    # Strip (0, rho_min) extrapolated geometrically from the three innermost rings
    first, second, third = (_quadrature_ring(cells, values, rho_min * 2 ** k, rho_min * 2 ** (k + 1))
                            for k in range(3))
    if first == 0:
        return 0.0, 0.0
    if second > 0 and third > 0:
        inner, outer = first / second, second / third
        if 0 < inner < 1 and 0 < outer < 1:
            tail = first * inner / (1 - inner)
            return tail, abs(tail - first * outer / (1 - outer))
    decay = 2.0 ** (-(s_weight + 1))
    tail = first * decay / (1 - decay)
    return tail, tail


def _quadrature_angle_edges(theta_lo: float, theta_hi: float, panels: int, foci: Sequence[complex],
                            rho_min: float) -> np.ndarray:
    # Uniform panels plus, per focus, breakpoints at arg q +- scale * 2^k
    edges = [np.linspace(theta_lo, theta_hi, panels + 1)]
    span = theta_hi - theta_lo
    for q in foci:
        scale = max(abs(q) - 1.0, rho_min)
        if scale >= 0.5:
            continue
        center = math.atan2(q.imag, q.real)
        center += 2 * math.pi * round((0.5 * (theta_lo + theta_hi) - center) / (2 * math.pi))
        steps = scale * 2.0 ** np.arange(int(math.ceil(math.log2(math.pi / scale))) + 1)
        offsets = np.concatenate([[0.0], steps, -steps])
        for shift in (-2 * math.pi, 0.0, 2 * math.pi):
            points = center + shift + offsets
            edges.append(points[(points > theta_lo) & (points < theta_hi)])
    merged = np.unique(np.concatenate(edges))
    keep = np.concatenate([[True], np.diff(merged) > 1e-14 * max(span, 1.0)])
    merged = merged[keep]
    merged[-1] = theta_hi
    return merged


def _quadrature_adaptive(integrand: Callable, s_weight: float, rho_max: float, theta_lo: float,
                         theta_hi: float, panels: int, tol: float, max_cells: int,
                         foci: Sequence[complex] = ()) -> QuadratureResult:
    if not s_weight > -1:
        raise ValueError(f"Weight exponent must be > -1, got {s_weight!r}")
    if not tol > 0:
        raise ValueError(f"Tolerance must be positive, got {tol!r}")
    rings = int(math.ceil(math.log2(1 / QUADRATURE_DEPTH)))
    edges = rho_max * 0.5 ** np.arange(rings + 1)
    rho_min = float(edges[-1])
    angles = _quadrature_angle_edges(theta_lo, theta_hi, panels, fn_foci(foci), rho_min)
    cells = np.array([
        (edges[k + 1], edges[k], angles[j], angles[j + 1])
        for k in range(rings) for j in range(len(angles) - 1)
    ])
    values, errors = _quadrature_evaluate(integrand, s_weight, cells)

    while True:
        tail, tail_error = _quadrature_tail(cells, values, rho_min, s_weight)
        value = float(np.sum(values)) + tail
        error = float(np.sum(errors)) + tail_error
        if error <= max(tol * abs(value), QUADRATURE_ATOL):
            return QuadratureResult(value, error, len(cells), 1.0 - rho_min)
        partial = QuadratureResult(value, error, len(cells), 1.0 - rho_min)
        budget = (max_cells - len(cells)) // 3
        if budget < 1 or float(np.sum(errors)) == 0:
            raise NonConvergent(
                f"Quadrature stalled at {len(cells)} cells: value {value:.6g}, error {error:.3g} "
                f"exceeds tol {tol:g}", partial)
        order = np.argsort(-errors, kind='stable')
        cumulative = np.cumsum(errors[order])
        count = min(int(np.searchsorted(cumulative, 0.5 * cumulative[-1])) + 1, budget)
        chosen = order[:count]
        keep = np.ones(len(cells), dtype=bool)
        keep[chosen] = False
        parents = cells[chosen]
        rho_cut = 0.5 * (parents[:, 0] + parents[:, 1])
        theta_cut = 0.5 * (parents[:, 2] + parents[:, 3])
        children = np.concatenate([
            np.stack([parents[:, 0], rho_cut, parents[:, 2], theta_cut], axis=1),
            np.stack([parents[:, 0], rho_cut, theta_cut, parents[:, 3]], axis=1),
            np.stack([rho_cut, parents[:, 1], parents[:, 2], theta_cut], axis=1),
            np.stack([rho_cut, parents[:, 1], theta_cut, parents[:, 3]], axis=1),
        ])
        child_values, child_errors = _quadrature_evaluate(integrand, s_weight, children)
        cells = np.concatenate([cells[keep], children])
        values = np.concatenate([values[keep], child_values])
        errors = np.concatenate([errors[keep], child_errors])


def quadrature_integrate_disk(integrand: Callable, s_weight: float, tol: float = QUADRATURE_TOL,
                              max_cells: int = QUADRATURE_MAX_CELLS, foci: Sequence[complex] = ()) -> QuadratureResult:
    """Integrate integrand(z) (1 - |z|²)^s_weight dA over the disk.

    Args:
        integrand: Nonnegative function of a complex numpy array, same shape out
        s_weight: Weight exponent, > -1
        tol: Relative tolerance
        max_cells: Cell budget before NonConvergent
        foci: Points q, |q| >= 1, where the integrand peaks at scale |q| - 1

    Returns:
        QuadratureResult

    Example:
        >>> round(quadrature_integrate_disk(lambda z: 1.0, 1.0).value, 6)  # pi / 2
        1.570796
    """
    return _quadrature_adaptive(integrand, s_weight, 1.0, -math.pi, math.pi, 8, tol, max_cells, foci)


def quadrature_integrate_box(integrand: Callable, box: CarlesonBox, s_weight: float,
                             tol: float = QUADRATURE_TOL, max_cells: int = QUADRATURE_MAX_CELLS,
                             foci: Sequence[complex] = ()) -> QuadratureResult:
    """Integrate over the Carleson box S(I) with the grid aligned to the box."""
    theta_lo, theta_hi = arc_angles(box.arc)
    panels = 8 if box.arc.length >= 1 else 4
    return _quadrature_adaptive(integrand, s_weight, box.arc.length, theta_lo, theta_hi, panels, tol, max_cells, foci)


def quadrature_trend_slope(x: Sequence[float], values: Sequence[float]) -> float:
    """Least-squares slope of log(value) against log(x).

    Zero values mean the quantity vanished: an all-zero series returns -inf.
    Returns nan when fewer than two positive values are available.
    """
    x = np.asarray(x, dtype=float)
    values = np.asarray(values, dtype=float)
    if len(values) and np.all(values == 0):
        return float('-inf')
    positive = values > 0
    if np.count_nonzero(positive) < 2:
        return float('nan')
    design = np.stack([np.log(x[positive]), np.ones(np.count_nonzero(positive))], axis=1)
    solution, *_ = np.linalg.lstsq(design, np.log(values[positive]), rcond=None)
    return float(solution[0])


def quadrature_profile_slope(radii: Sequence[float], values: Sequence[float], r_min: float = TREND_FROM) -> float:
    """Decay trend of a boundary profile: slope against log(1 / (1 - r)) for r >= r_min."""
    radii = np.asarray(radii, dtype=float)
    values = np.asarray(values, dtype=float)
    window = (radii >= r_min) & (radii < 1)
    return quadrature_trend_slope(1 / (1 - radii[window]), values[window]) if np.any(window) else float('nan')


def quadrature_sup_profile(objective: Callable, radii: Sequence[float] = SUP_RADII,
                           angles_per_radius: int = SUP_ANGLES, refine: bool = True) -> SupProfile:
    """Estimate sup over the disk of objective(a) on a polar ladder.

    Angles include theta = 0. One local refinement pass samples extra
    angles and radial midpoints around the argmax.

    Args:
        objective: Function of a complex point a
        radii: Ascending radii in [0, 1)
        angles_per_radius: Angles sampled on each positive radius
        refine: Run the local refinement pass

    Returns:
        SupProfile with per-radius suprema and the fitted decay slope

    Raises:
        ObjectiveFailure: An objective evaluation raised, carrying the point
    """
    radii = sorted(float(r) for r in radii)
    if not radii or radii[0] < 0 or radii[-1] >= 1:
        raise ValueError(f"Radii must lie in [0, 1), got {radii!r}")
    if angles_per_radius < 1:
        raise ValueError(f"angles_per_radius must be positive, got {angles_per_radius!r}")

    def evaluate(a: complex) -> float:
        try:
            result = float(objective(a))
        except ValueError as e:
            raise ObjectiveFailure(f"Objective failed at a = {a!r}: {e}", a) from e
        if not math.isfinite(result):
            raise ObjectiveFailure(f"Objective is not finite at a = {a!r}", a)
        return result

    step = 2 * math.pi / angles_per_radius
    values = []
    best_value, best_point, best_index = -math.inf, 0j, 0
    for index, r in enumerate(radii):
        if r == 0:
            points = [0j]
        else:
            points = [r * complex(math.cos(j * step), math.sin(j * step)) for j in range(angles_per_radius)]
        row = [evaluate(a) for a in points]
        j = int(np.argmax(row))
        values.append(row[j])
        if row[j] > best_value:
            best_value, best_point, best_index = row[j], points[j], index

    if refine and radii[best_index] > 0:
        r = radii[best_index]
        theta = math.atan2(best_point.imag, best_point.real)
        extra = [r * complex(math.cos(theta + k * step / 4), math.sin(theta + k * step / 4))
                 for k in (-3, -2, -1, 1, 2, 3)]
        for a in extra:
            v = evaluate(a)
            if v > values[best_index]:
                values[best_index] = v
            if v > best_value:
                best_value, best_point = v, a
        neighbours = [radii[i] for i in (best_index - 1, best_index + 1) if 0 <= i < len(radii)]
        for other in neighbours:
            a = 0.5 * (r + other) * complex(math.cos(theta), math.sin(theta))
            v = evaluate(a)
            if v > best_value:
                best_value, best_point = v, a

    slope = quadrature_profile_slope(radii, values)
    return SupProfile(tuple(radii), tuple(values), best_value, disk_point(best_point), slope, ())


def quadrature_path_integral(integrand: Callable, start, end, tol: float = 1e-11,
                             panels: int = 4, max_panels: int = 4096) -> np.ndarray:
    """Integrate integrand along the segments [start, end] with composite 16-point Gauss-Legendre.

    The panel count doubles until two resolutions agree to tol.
    """
    end = np.asarray(end, dtype=complex)
    shape = end.shape
    end = end.ravel()
    start = np.broadcast_to(np.asarray(start, dtype=complex), shape).ravel()
    nodes, weights = leggauss(16)
    chunk = max(1, 2000000 // (16 * max_panels))
    previous = None
    while panels <= max_panels:
        u = ((np.arange(panels)[:, None] + 0.5 + 0.5 * nodes[None, :]) / panels).ravel()
        w = np.tile(weights / (2 * panels), panels)
        total = np.empty(end.shape, dtype=complex)
        for lo in range(0, len(end), chunk):
            a, b = start[lo:lo + chunk], end[lo:lo + chunk]
            zeta = a[:, None] + (b - a)[:, None] * u[None, :]
            values = integrand(zeta)
            if not np.all(np.isfinite(values)):
                raise ValueError(f"Integrand is not finite on the path to {complex(b[0])!r}")
            total[lo:lo + chunk] = (b - a) * (values @ w)
        if previous is not None and np.max(np.abs(total - previous)) <= tol * (1 + np.max(np.abs(total))):
            return total.reshape(shape) if shape else total
        previous = total
        panels *= 2
    raise ValueError(f"Path integral did not reach tolerance {tol:g}")


### FUNCTION SPACES ###
# M_alpha(D^p_s) seminorms in three equivalent forms, D^p_s norms, F(p, q, s)
# and its logarithmic variant, weighted Bloch norms and weight regularity.
# Seminorm values omit the |f(0)| term; norms add it where stated.

SpaceParams = namedtuple('SpaceParams', ['p', 's', 'alpha', 'admissible'])

AdmissibleReport = namedtuple('AdmissibleReport', ['admissible', 'classification'])

NormEstimate = namedtuple('NormEstimate', ['value', 'form', 'profile', 'quadrature_meta'])

SpaceSelector = namedtuple(
    'SpaceSelector',
    ['kind', 'params', 'form', 'beta', 'q', 'log_weighted', 'weight'],
    defaults=[None, 'invariant', None, 0.0, False, None],
)

# value(z) > 0 and gradient(z) = d/dx + i d/dy, both on numpy arrays
Weight = namedtuple('Weight', ['label', 'value', 'gradient'])

MADS_FORMS = ('invariant', 'box', 'kernel')
SELECTOR_KINDS = ('mads', 'f_family', 'bloch')
SPACE_PRESETS = ('bmoa', 'bloch', 'q_s', 'bmoa_p', 'morrey')
WEIGHT_RADII = tuple(np.concatenate([[0.0], 1 - 10 ** -np.linspace(0.05, 4, 80)]))


def space_is_admissible(p: float, s: float, alpha: float) -> bool:
    """1 < p, 0 <= alpha < (s - (p - 2)) / p, and s > p - 2 (p >= 2) or s >= 0 (1 < p < 2)."""
    if not p > 1 or alpha < 0:
        return False
    if not alpha < (s - (p - 2)) / p:
        return False
    return (p >= 2 and s > p - 2) or (1 < p < 2 and s >= 0)


def space_params(p: float, s: float, alpha: float = 0.0) -> SpaceParams:
    """Build SpaceParams with the admissible flag computed from the predicate."""
    p, s, alpha = float(p), float(s), float(alpha)
    if not p > 1:
        raise ValueError(f"p must be > 1, got {p!r}")
    if alpha < 0:
        raise ValueError(f"alpha must be nonnegative, got {alpha!r}")
    return SpaceParams(p, s, alpha, space_is_admissible(p, s, alpha))


def space_admissible_check(params: SpaceParams) -> AdmissibleReport:
    """Classify parameters.

    collapsed_to_Dps when s >= p - 2 and alpha >= (s - (p - 2)) / p, since then
    M_alpha(D^p_s) = D^p_s; proper_Malpha inside the admissible range;
    invalid otherwise.

    Example:
        >>> space_admissible_check(space_params(2, 1, 0.75)).classification
        'collapsed_to_Dps'
    """
    p, s, alpha = params.p, params.s, params.alpha
    admissible = space_is_admissible(p, s, alpha)
    if admissible:
        classification = 'proper_Malpha'
    elif s >= p - 2 and alpha >= (s - (p - 2)) / p:
        classification = 'collapsed_to_Dps'
    else:
        classification = 'invalid'
    return AdmissibleReport(admissible, classification)


def space_preset(name: str, value: Optional[float] = None) -> SpaceParams:
    """Parameters of the classical spaces.

    bmoa: (2, 1, 0); bloch: (2, s, 0) with s > 1 (default 2); q_s: (2, s, 0);
    bmoa_p: (p, p - 1, 0); morrey: (2, 1, (1 - lambda) / 2) with 0 < lambda < 1.
    """
    if name == 'bmoa':
        return space_params(2, 1, 0)
    elif name == 'bloch':
        s = 2.0 if value is None else value
        if not s > 1:
            raise ValueError(f"Bloch preset needs s > 1, got {s!r}")
        return space_params(2, s, 0)
    elif name == 'q_s':
        if value is None or not value > 0:
            raise ValueError(f"Q_s preset needs s > 0, got {value!r}")
        return space_params(2, value, 0)
    elif name == 'bmoa_p':
        if value is None or not value > 1:
            raise ValueError(f"BMOA_p preset needs p > 1, got {value!r}")
        return space_params(value, value - 1, 0)
    elif name == 'morrey':
        if value is None or not 0 < value < 1:
            raise ValueError(f"Morrey preset needs 0 < lambda < 1, got {value!r}")
        return space_params(2, 1, (1 - value) / 2)
    raise ValueError(f"Unknown space preset: {name!r}")


def _space_meta(tol: float) -> Dict[str, Any]:
    return {'tol': tol, 'integrals': 0, 'cells_used': 0, 'max_relative_error': 0.0, 'max_radius_reached': 0.0}


def _space_record(meta: Dict[str, Any], result: QuadratureResult) -> float:
    meta['integrals'] += 1
    meta['cells_used'] += result.cells_used
    if result.value > 0:
        meta['max_relative_error'] = max(meta['max_relative_error'], result.error_bound / result.value)
    meta['max_radius_reached'] = max(meta['max_radius_reached'], result.max_radius_reached)
    return result.value


def _space_zero_profile(radii: Sequence[float]) -> SupProfile:
    radii = tuple(sorted(float(r) for r in radii))
    return SupProfile(radii, tuple(0.0 for _ in radii), 0.0, disk_point(0), float('-inf'), ())


def space_mads_objective(f: AnalyticFn, params: SpaceParams, form: str = 'invariant',
                         beta: Optional[float] = None, tol: float = QUADRATURE_TOL,
                         meta: Optional[Dict[str, Any]] = None) -> Callable:
    """The functional a -> (p-th power) whose supremum defines the M_alpha seminorm.

    invariant: (1 - |a|²)^(p alpha) ∫ |(f∘phi_a)'|^p (1 - |z|²)^s dA
    kernel:    ∫ |f'|^p (1 - |z|²)^s (1 - |a|²)^beta / |1 - conj(a) z|^(s - (p(alpha + 1) - 2) + beta) dA
    box:       (1 - |a|²)^-(s - (p(alpha + 1) - 2)) ∫_S(a) |f'|^p (1 - |z|²)^s dA

    Substituting z = phi_a(w) in the invariant form, with
    1 - |phi_a(w)|² = (1 - |a|²)(1 - |w|²) / |1 - conj(a) w|² and
    |phi_a'(w)| = (1 - |a|²) / |1 - conj(a) w|², gives

        (1 - |a|²)^(p alpha + s + 2 - p) ∫ |f'|^p (1 - |w|²)^s / |1 - conj(a) w|^(2s + 4 - 2p) dA

    so the default beta = s - (p - 2) + p alpha makes exponent + beta =
    2s + 4 - 2p and the kernel form equals the invariant form exactly. At
    alpha = 0 it reduces to beta = s - (p - 2).
    """
    if form not in MADS_FORMS:
        raise ValueError(f"Unknown seminorm form: {form!r}")
    p, s, alpha = params.p, params.s, params.alpha
    exponent = s - (p * (alpha + 1) - 2)
    if beta is None:
        beta = s - (p - 2) + p * alpha
    if form == 'kernel' and not beta > 0:
        raise ValueError(f"Kernel form needs beta > 0, got {beta!r}")
    meta = _space_meta(tol) if meta is None else meta

    def integrand_plain(z):
        return np.abs(f.derivative(z)) ** p

    def objective(a: complex) -> float:
        scale = 1 - abs(a) ** 2
        if form == 'invariant':
            def integrand(z):
                phi, dphi = disk_mobius_jet(a, z)
                return np.abs(f.derivative(phi) * dphi) ** p
            foci = [disk_mobius_focus(a, q) for q in f.foci] + [fn_exterior_pole(a)]
            result = quadrature_integrate_disk(integrand, s, tol, foci=foci)
            return scale ** (p * alpha) * _space_record(meta, result)
        elif form == 'kernel':
            abar = a.conjugate()

            def integrand(z):
                return integrand_plain(z) * scale ** beta / np.abs(1 - abar * z) ** (exponent + beta)
            result = quadrature_integrate_disk(integrand, s, tol, foci=f.foci + (fn_exterior_pole(a),))
            return _space_record(meta, result)
        else:
            result = quadrature_integrate_box(integrand_plain, disk_box_of_point(a), s, tol, foci=f.foci)
            return _space_record(meta, result) / scale ** exponent

    return objective


def space_mads_seminorm(f: AnalyticFn, params: SpaceParams, form: str = 'invariant',
                        beta: Optional[float] = None, tol: float = QUADRATURE_TOL,
                        radii: Sequence[float] = SUP_RADII, angles: int = SUP_ANGLES) -> NormEstimate:
    """Seminorm of f in M_alpha(D^p_s): the p-th root of the supremum over the a-ladder.

    Args:
        f: Function to measure
        params: Space parameters; the box and kernel forms need the proper range
        form: 'invariant', 'box' or 'kernel'
        beta: Kernel exponent, see space_mads_objective
        tol: Relative quadrature tolerance
        radii: Radii ladder for the supremum
        angles: Angles per radius

    Returns:
        NormEstimate whose profile keeps the per-radius suprema

    Example:
        >>> round(space_mads_seminorm(fn_monomial(1), space_preset('bmoa')).value, 4)
        1.2533
    """
    classification = space_admissible_check(params).classification
    if classification == 'invalid':
        raise ValueError(f"Parameters {tuple(params[:3])} are outside every M_alpha(D^p_s) range")
    if form != 'invariant' and classification != 'proper_Malpha':
        raise ValueError(f"The {form} form needs admissible parameters, got {tuple(params[:3])}")
    meta = _space_meta(tol)
    if fn_is_constant(f):
        profile = _space_zero_profile(radii)
    else:
        objective = space_mads_objective(f, params, form, beta, tol, meta)
        profile = quadrature_sup_profile(objective, radii, angles)
    return NormEstimate(profile.global_sup ** (1 / params.p), form, profile, meta)


def space_dps_norm(f: AnalyticFn, p: float, s: float, tol: float = QUADRATURE_TOL) -> NormEstimate:
    """||f||_{D^p_s} = |f(0)| + (∫ |f'|^p (1 - |z|²)^s dA)^(1/p)."""
    if not p > 0:
        raise ValueError(f"p must be positive, got {p!r}")
    meta = _space_meta(tol)
    if fn_is_constant(f):
        integral = 0.0
    else:
        result = quadrature_integrate_disk(lambda z: np.abs(f.derivative(z)) ** p, s, tol, foci=f.foci)
        integral = _space_record(meta, result)
    profile = SupProfile((0.0,), (integral,), integral, disk_point(0), float('nan'), ())
    return NormEstimate(abs(complex(f.value(0j))) + integral ** (1 / p), 'dps', profile, meta)


def space_f_family_objective(f: AnalyticFn, p: float, q: float, s: float, log_weighted: bool = False,
                             tol: float = QUADRATURE_TOL, meta: Optional[Dict[str, Any]] = None) -> Callable:
    """a -> ∫ |f'|^p (1 - |z|²)^q (1 - |phi_a(z)|²)^s dA, times log(1 / (1 - |a|²))^p when log_weighted."""
    if not (q > -2 and s > 0 and q + s > -1):
        raise ValueError(f"F(p, q, s) needs q > -2, s > 0, q + s > -1, got q={q!r}, s={s!r}")
    meta = _space_meta(tol) if meta is None else meta

    def objective(a: complex) -> float:
        scale = 1 - abs(a) ** 2
        factor = math.log(1 / scale) ** p if log_weighted else 1.0
        if factor == 0:
            return 0.0
        abar = a.conjugate()

        def integrand(z):
            return np.abs(f.derivative(z)) ** p * scale ** s / np.abs(1 - abar * z) ** (2 * s)
        result = quadrature_integrate_disk(integrand, q + s, tol, foci=f.foci + (fn_exterior_pole(a),))
        return factor * _space_record(meta, result)

    return objective


def space_f_family_norm(f: AnalyticFn, p: float, q: float, s: float, log_weighted: bool = False,
                        tol: float = QUADRATURE_TOL, radii: Sequence[float] = SUP_RADII,
                        angles: int = SUP_ANGLES) -> NormEstimate:
    """The F(p, q, s) supremum (F_log when log_weighted), without a p-th root."""
    meta = _space_meta(tol)
    if fn_is_constant(f):
        profile = _space_zero_profile(radii)
    else:
        objective = space_f_family_objective(f, p, q, s, log_weighted, tol, meta)
        profile = quadrature_sup_profile(objective, radii, angles)
    form = 'f_log' if log_weighted else 'f_family'
    return NormEstimate(profile.global_sup, form, profile, meta)


def weight_constant(c: float = 1.0) -> Weight:
    if not c > 0:
        raise ValueError(f"Weight must be positive, got {c!r}")
    return Weight(f'constant({c:g})', lambda z: np.full(np.shape(z), float(c)), lambda z: np.zeros(np.shape(z), dtype=complex))


def weight_log(K: float = math.e) -> Weight:
    """omega(z) = log(K / (1 - |z|²)), gradient 2z / (1 - |z|²)."""
    if not K > 1:
        raise ValueError(f"log weight needs K > 1, got {K!r}")

    def value(z):
        return np.log(K / (1 - np.abs(z) ** 2))

    def gradient(z):
        return 2 * z / (1 - np.abs(z) ** 2)

    return Weight(f'log({K:g})', value, gradient)


def weight_alpha_power(alpha: float) -> Weight:
    """omega(z) = (1 - |z|²)^alpha."""
    def value(z):
        return (1 - np.abs(z) ** 2) ** alpha

    def gradient(z):
        return -2 * alpha * z * (1 - np.abs(z) ** 2) ** (alpha - 1)

    return Weight(f'power({alpha:g})', value, gradient)


def space_bloch_objective(f: AnalyticFn, weight: Union[str, Weight] = 'alpha_power', alpha: float = 1.0) -> Callable:
    """z -> w(z) |f'(z)| with w = (1 - |z|²)^alpha, (1 - |z|²) log(e / (1 - |z|²)), or omega(z)(1 - |z|²)."""
    if weight == 'alpha_power':
        def factor(z):
            return (1 - abs(z) ** 2) ** alpha
    elif weight == 'log':
        def factor(z):
            x = 1 - abs(z) ** 2
            return x * math.log(math.e / x)
    elif isinstance(weight, Weight):
        def factor(z):
            return float(weight.value(np.array([z]))[0]) * (1 - abs(z) ** 2)
    else:
        raise ValueError(f"Unknown Bloch weight: {weight!r}")

    def objective(z: complex) -> float:
        return factor(z) * abs(complex(f.derivative(z)))

    return objective


def space_weighted_bloch_norm(f: AnalyticFn, weight: Union[str, Weight] = 'alpha_power', alpha: float = 1.0,
                              radii: Sequence[float] = SUP_RADII, angles: int = SUP_ANGLES) -> NormEstimate:
    """Supremum of the weighted Bloch functional over the z-ladder (B^alpha, B_log or B_omega)."""
    profile = quadrature_sup_profile(space_bloch_objective(f, weight, alpha), radii, angles)
    label = weight.label if isinstance(weight, Weight) else weight
    return NormEstimate(profile.global_sup, 'bloch', profile, {'weight': label, 'alpha': alpha})


def space_objective(f: AnalyticFn, selector: SpaceSelector, tol: float = QUADRATURE_TOL,
                    meta: Optional[Dict[str, Any]] = None) -> Callable:
    """The defining functional of the space a selector names."""
    if selector.kind == 'mads':
        return space_mads_objective(f, selector.params, selector.form, selector.beta, tol, meta)
    elif selector.kind == 'f_family':
        p, s = selector.params.p, selector.params.s
        return space_f_family_objective(f, p, selector.q, s, selector.log_weighted, tol, meta)
    elif selector.kind == 'bloch':
        weight = selector.weight if selector.weight is not None else 'alpha_power'
        alpha = selector.params.alpha if selector.params is not None else 1.0
        return space_bloch_objective(f, weight, alpha)
    raise ValueError(f"Unknown space selector kind: {selector.kind!r}")


def space_littleo_profile(f: AnalyticFn, selector: SpaceSelector, radii: Sequence[float] = SUP_RADII,
                          angles: int = SUP_ANGLES, tol: float = QUADRATURE_TOL) -> SupProfile:
    """Per-radius suprema of the defining functional with the fitted decay slope.

    The slope is against log(1 / (1 - r)) over r >= 0.9; negative means decay.
    No membership verdict is made here.
    """
    if fn_is_constant(f):
        return _space_zero_profile(radii)
    return quadrature_sup_profile(space_objective(f, selector, tol), radii, angles)


def weight_regularity_constant(omega: Weight, radii: Sequence[float] = WEIGHT_RADII, angles: int = 16) -> float:
    """Empirical C_omega = sup (1 - |z|²) |grad omega| / omega over a polar grid."""
    radii = np.asarray(radii, dtype=float)
    theta = 2 * np.pi * np.arange(angles) / angles
    z = (radii[:, None] * np.exp(1j * theta[None, :])).ravel()
    values = np.asarray(omega.value(z), dtype=float)
    if np.any(values <= 0):
        bad = complex(z[values <= 0][0])
        raise ValueError(f"Weight {omega.label} is not positive at z = {bad!r}")
    ratios = (1 - np.abs(z) ** 2) * np.abs(omega.gradient(z)) / values
    return float(np.max(ratios))


def space_norm_to_dict(estimate: NormEstimate) -> Dict[str, Any]:
    """JSON-ready dictionary for a NormEstimate."""
    profile = estimate.profile
    return {
        'value': _json_float(estimate.value),
        'form': estimate.form,
        'profile': space_profile_to_dict(profile),
        'quadrature_meta': {key: _json_float(v) if isinstance(v, float) else v
                            for key, v in estimate.quadrature_meta.items()},
    }


def space_profile_to_dict(profile: SupProfile) -> Dict[str, Any]:
    return {
        'radii': [_json_float(r) for r in profile.radii],
        'values': [_json_float(v) for v in profile.values],
        'global_sup': _json_float(profile.global_sup),
        'attained_at': [profile.attained_at.re, profile.attained_at.im],
        'slope': _json_float(profile.slope),
        'excluded': [_json_float(r) for r in profile.excluded],
    }


def _json_float(x):
    x = float(x)
    if math.isfinite(x):
        return x
    return 'nan' if math.isnan(x) else ('inf' if x > 0 else '-inf')


### SEMIGROUPS ###
# Generators G with dphi_t/dt = G(phi_t), given in closed form or through the
# Berkson-Porta factorization G(z) = (conj(tau) z - 1)(z - tau) p(z).

GeneratorSpec = namedtuple(
    'GeneratorSpec',
    ['label', 'G', 'tau', 'herglotz', 'flow_exact', 'koenigs_exact'],
    defaults=[None, None, None, None],
)

FlowResult = namedtuple('FlowResult', ['value', 't', 'steps', 'local_error', 'derivative'])

# kind in {elliptic, non_elliptic, trivial}; lam = -G'(tau) for elliptic only
SemigroupClass = namedtuple('SemigroupClass', ['kind', 'dw_point', 'lam', 'attracting'])

GeneratorValidation = namedtuple('GeneratorValidation', ['valid', 'min_re_p', 'excluded_radius'])

FLOW_TOL = 1e-11
FLOW_MAX_STEPS = 1000000
CLASSIFY_HORIZON = (1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 50.0)
KOENIGS_BALL = 0.1
KOENIGS_TOL = 1e-11
BLOCH_RADII = (0.5, 0.75, 0.9, 0.95, 0.99, 0.995, 0.999)
BLOCH_ANGLES = 256
CLOSED_FORM_IDS = ('linear', 'parabolic', 'logistic', 'hyperbolic')
HERGLOTZ_IDS = ('one', 'cayley', 'constant')

GENERATOR_CATALOGUE = {
    'neg_z': {'closed_form_id': 'linear', 'parameters': {'c': [-1.0, 0.0]}},
    'rot_z': {'closed_form_id': 'linear', 'parameters': {'c': [0.0, 1.0]}},
    'neg_2z': {'closed_form_id': 'linear', 'parameters': {'c': [-2.0, 0.0]}},
    'parabolic': {'closed_form_id': 'parabolic', 'parameters': {}},
    'logistic': {'closed_form_id': 'logistic', 'parameters': {}},
    'hyperbolic': {'closed_form_id': 'hyperbolic', 'parameters': {}},
    'bp_parabolic': {'berkson_porta': {'tau': [1.0, 0.0], 'p_id': 'one'}, 'parameters': {}},
    'bp_shifted': {'berkson_porta': {'tau': [0.5, 0.0], 'p_id': 'one'}, 'parameters': {}},
}

# Dormand-Prince 5(4) tableau
_DP_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
)
_DP_B = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84)
_DP_B_LOW = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40)
_DP_E = tuple(b - b_low for b, b_low in zip(_DP_B + (0.0,), _DP_B_LOW))


class StepUnderflow(ValueError):
    """The flow step size collapsed; carries the last accepted time and state."""

    def __init__(self, message: str, t: float, x):
        super().__init__(message)
        self.t = t
        self.x = x


class Ambiguous(ValueError):
    """Long-time flow did not settle; carries the trajectory tail [(t, x), ...]."""

    def __init__(self, message: str, tail: List[Tuple[float, complex]]):
        super().__init__(message)
        self.tail = tail


def generator_from_closed_form(label: str, G: AnalyticFn, tau=None, flow_exact: Optional[Callable] = None,
                               koenigs_exact: Optional[AnalyticFn] = None) -> GeneratorSpec:
    """Wrap a closed-form vector field G; tau is an optional Denjoy-Wolff hint."""
    tau = None if tau is None else disk_as_complex(tau)
    return GeneratorSpec(label, G, tau, None, flow_exact, koenigs_exact)


def generator_berkson_porta(label: str, tau, herglotz: AnalyticFn) -> GeneratorSpec:
    """G(z) = (conj(tau) z - 1)(z - tau) p(z), with |tau| <= 1 and Re p >= 0."""
    tau = disk_as_complex(tau)
    if abs(tau) > 1 + 1e-12:
        raise ValueError(f"Denjoy-Wolff point must lie in the closed disk, got |tau| = {abs(tau)!r}")
    if abs(abs(tau) - 1) < 1e-12:
        tau = tau / abs(tau)
    tbar = tau.conjugate()

    def value(z):
        z = _disk_as_input(z)
        return (tbar * z - 1) * (z - tau) * herglotz.value(z)

    def derivative(z):
        z = _disk_as_input(z)
        p = herglotz.value(z)
        return (tbar * (z - tau) + (tbar * z - 1)) * p + (tbar * z - 1) * (z - tau) * herglotz.derivative(z)

    G = fn_from_closed_form(f'bp({label})', value, derivative)
    return GeneratorSpec(label, G, tau, herglotz, None, None)


def semigroup_check_consistency(spec: GeneratorSpec) -> float:
    """Compare G with its Berkson-Porta factorization on a sample grid.

    Returns:
        Largest relative residual

    Raises:
        ValueError: Residual above 1e-10
    """
    if spec.herglotz is None or spec.tau is None:
        return 0.0
    grid = _fn_sample_grid(0.95, 8, 32)
    tau = spec.tau
    expected = (tau.conjugate() * grid - 1) * (grid - tau) * spec.herglotz.value(grid)
    actual = spec.G.value(grid)
    residual = float(np.max(np.abs(actual - expected) / (1 + np.abs(actual))))
    if residual > 1e-10:
        raise ValueError(f"Generator {spec.label} disagrees with its Berkson-Porta data: residual {residual:.3g}")
    return residual


def _generator_herglotz(p_id: str, parameters: Dict[str, Any]) -> AnalyticFn:
    if p_id == 'one':
        return fn_constant(1.0)
    elif p_id == 'cayley':
        return fn_from_closed_form(
            'cayley',
            lambda z: (1 + _disk_as_input(z)) / (1 - _disk_as_input(z)),
            lambda z: 2 / (1 - _disk_as_input(z)) ** 2,
            foci=[1],
        )
    elif p_id == 'constant':
        c = disk_as_complex(parameters.get('p', [1.0, 0.0]))
        if c.real < 0:
            raise ValueError(f"Herglotz constant needs Re p >= 0, got {c!r}")
        return fn_constant(c)
    raise ValueError(f"Unknown Herglotz function id: {p_id!r}")


def _generator_closed_form(label: str, closed_form_id: str, parameters: Dict[str, Any]) -> GeneratorSpec:
    if closed_form_id == 'linear':
        c = disk_as_complex(parameters.get('c', [-1.0, 0.0]))
        G = fn_from_taylor([0, c], label=f'{c.real:g}{c.imag:+g}j z')

        def flow(z, t):
            factor = np.exp(c * t)
            return factor * _disk_as_input(z), factor * np.ones_like(_disk_as_input(z))

        identity = fn_monomial(1)._replace(label='z')
        return generator_from_closed_form(label, G, 0j, flow, identity if c != 0 else None)
    elif closed_form_id == 'parabolic':
        G = fn_from_taylor([1, -2, 1], label='(1-z)^2')

        def flow(z, t):
            z = _disk_as_input(z)
            denominator = 1 + t * (1 - z)
            return (z + t * (1 - z)) / denominator, 1 / denominator ** 2

        h = fn_from_closed_form('iz/(1-z)', lambda z: 1j * _disk_as_input(z) / (1 - _disk_as_input(z)),
                                lambda z: 1j / (1 - _disk_as_input(z)) ** 2, foci=[1])
        return generator_from_closed_form(label, G, 1 + 0j, flow, h)
    elif closed_form_id == 'logistic':
        G = fn_from_taylor([0, -1, 1], label='-z(1-z)')

        def flow(z, t):
            z = _disk_as_input(z)
            decay = math.exp(-t)
            denominator = z * decay + 1 - z
            return z * decay / denominator, decay / denominator ** 2

        h = fn_from_closed_form('z/(1-z)', lambda z: _disk_as_input(z) / (1 - _disk_as_input(z)),
                                lambda z: 1 / (1 - _disk_as_input(z)) ** 2, foci=[1])
        return generator_from_closed_form(label, G, 0j, flow, h)
    elif closed_form_id == 'hyperbolic':
        G = fn_from_taylor([1, 0, -1], label='1-z^2')

        def flow(z, t):
            z = _disk_as_input(z)
            slope = math.tanh(t)
            denominator = 1 + z * slope
            return (z + slope) / denominator, (1 - slope * slope) / denominator ** 2

        h = fn_from_closed_form('(i/2)log((1+z)/(1-z))',
                                lambda z: 0.5j * np.log((1 + _disk_as_input(z)) / (1 - _disk_as_input(z))),
                                lambda z: 1j / (1 - _disk_as_input(z) ** 2), foci=[1, -1])
        return generator_from_closed_form(label, G, 1 + 0j, flow, h)
    raise ValueError(f"Unknown closed form id: {closed_form_id!r}")


def semigroup_catalogue_entry(entry: Dict[str, Any], name: Optional[str] = None) -> GeneratorSpec:
    """Build a generator from {name, closed_form_id | berkson_porta{tau, p_id}, parameters}.

    When both forms are given they must agree (see semigroup_check_consistency).
    """
    if not isinstance(entry, dict):
        raise ValueError(f"Generator entry must be an object, got {entry!r}")
    name = name or entry.get('name', 'inline')
    parameters = entry.get('parameters', {}) or {}
    closed_form_id = entry.get('closed_form_id')
    berkson_porta = entry.get('berkson_porta')
    if closed_form_id is None and berkson_porta is None:
        raise ValueError(f"Generator {name!r} needs closed_form_id or berkson_porta")
    closed = _generator_closed_form(name, closed_form_id, parameters) if closed_form_id else None
    if berkson_porta is None:
        return closed
    if 'tau' not in berkson_porta or 'p_id' not in berkson_porta:
        raise ValueError(f"Generator {name!r}: berkson_porta needs tau and p_id")
    herglotz = _generator_herglotz(berkson_porta['p_id'], parameters)
    factored = generator_berkson_porta(name, berkson_porta['tau'], herglotz)
    if closed is None:
        return factored
    merged = closed._replace(tau=factored.tau, herglotz=herglotz)
    semigroup_check_consistency(merged)
    return merged


def semigroup_catalogue_load(path) -> Dict[str, Dict[str, Any]]:
    """Read a generator catalogue: a JSON list of entries, or {"generators": [...]}."""
    path = Path(path)
    try:
        with open(path, 'r', encoding='utf-8') as handle:
            data = json.load(handle)
    except json.JSONDecodeError as e:
        raise ValueError(f"{path}:{e.lineno}:{e.colno}: {e.msg}")
    except OSError as e:
        raise ValueError(f"Failed to read catalogue {path}: {e}")
    entries = data.get('generators') if isinstance(data, dict) else data
    if not isinstance(entries, list):
        raise ValueError(f"{path}: expected a list of generator entries")
    catalogue = {}
    for index, entry in enumerate(entries):
        if not isinstance(entry, dict) or 'name' not in entry:
            raise ValueError(f"{path}: generators[{index}] needs a name")
        semigroup_catalogue_entry(entry)
        catalogue[entry['name']] = entry
    return catalogue


def semigroup_generator(ref, catalogue: Optional[Dict[str, Dict[str, Any]]] = None) -> GeneratorSpec:
    """Resolve a GeneratorSpec, a catalogue name or an inline entry."""
    if isinstance(ref, GeneratorSpec):
        return ref
    if isinstance(ref, str):
        entries = dict(GENERATOR_CATALOGUE)
        entries.update(catalogue or {})
        if ref not in entries:
            raise ValueError(f"Unknown generator: {ref!r}")
        return semigroup_catalogue_entry(entries[ref], name=ref)
    return semigroup_catalogue_entry(ref)


def semigroup_validate_generator(spec: GeneratorSpec, grid: Optional[np.ndarray] = None) -> GeneratorValidation:
    """Recover p = G / ((conj(tau) z - 1)(z - tau)) and report min Re p.

    Points in the hyperbolic ball of radius 0.1 around an interior tau are
    excluded. Valid iff min Re p >= -1e-9.
    """
    tau = spec.tau
    if tau is None:
        klass = semigroup_classify(spec)
        if klass.kind == 'trivial':
            return GeneratorValidation(True, 0.0, 0.0)
        tau = complex(klass.dw_point)
    if grid is None:
        grid = _fn_sample_grid(0.99, 24, 96)
    grid = np.asarray(grid, dtype=complex)
    excluded = 0.0
    if abs(tau) < 1:
        distance = np.abs(disk_mobius_jet(tau, grid)[0])
        keep = distance >= math.tanh(KOENIGS_BALL)
        grid = grid[keep]
        excluded = KOENIGS_BALL
    factor = (tau.conjugate() * grid - 1) * (grid - tau)
    p = spec.G.value(grid) / factor
    min_re_p = float(np.min(p.real))
    return GeneratorValidation(min_re_p >= -1e-9, min_re_p, excluded)


def _semigroup_integrate(spec: GeneratorSpec, z: np.ndarray, t: float, tol: float = FLOW_TOL,
                         max_steps: int = FLOW_MAX_STEPS) -> Tuple[np.ndarray, np.ndarray, int, float]:
    # Dormand-Prince on x' = G(x) with the variational equation d' = G'(x) d.
    # One step size is shared by the whole batch.
    x = np.array(z, dtype=complex).ravel()
    d = np.ones_like(x)
    if t == 0:
        return x, d, 0, 0.0
    G = spec.G

    def rhs(x, d):
        return G.value(x), G.derivative(x) * d

    elapsed = 0.0
    h = min(t, 0.05)
    steps = 0
    worst = 0.0
    kx1, kd1 = rhs(x, d)
    while elapsed < t:
        if steps >= max_steps:
            raise StepUnderflow(f"Flow hit the step cap {max_steps} at t = {elapsed:.6g}", elapsed, x)
        h = min(h, t - elapsed)
        kx, kd = [kx1], [kd1]
        for row in _DP_A[1:]:
            xi = x + h * sum(a * k for a, k in zip(row, kx))
            di = d + h * sum(a * k for a, k in zip(row, kd))
            fx, fd = rhs(xi, di)
            kx.append(fx)
            kd.append(fd)
        x_new = x + h * sum(b * k for b, k in zip(_DP_B, kx))
        d_new = d + h * sum(b * k for b, k in zip(_DP_B, kd))
        finite = np.all(np.isfinite(x_new)) and np.all(np.isfinite(d_new))
        inside = finite and bool(np.all(np.abs(x_new) < 1))
        if inside:
            kx7, kd7 = rhs(x_new, d_new)
            err_x = h * sum(e * k for e, k in zip(_DP_E, kx + [kx7]))
            err_d = h * sum(e * k for e, k in zip(_DP_E, kd + [kd7]))
            ratio = max(
                float(np.max(np.abs(err_x) / (tol * (1 + np.abs(x_new))))),
                float(np.max(np.abs(err_d) / (tol * (1 + np.abs(d_new))))),
            )
        else:
            ratio = math.inf
        if ratio <= 1:
            if h >= t - elapsed:
                elapsed = t
            else:
                elapsed += h
            x, d = x_new, d_new
            kx1, kd1 = kx7, kd7
            steps += 1
            worst = max(worst, float(np.max(np.abs(err_x))))
        if ratio == 0:
            factor = 5.0
        elif math.isinf(ratio):
            factor = 0.25
        else:
            factor = min(5.0, max(0.2, 0.9 * ratio ** -0.2))
        h = h * factor
        if elapsed < t and h < 1e-14 * max(1.0, t):
            raise StepUnderflow(f"Flow step underflow at t = {elapsed:.6g}", elapsed, x)
    return x, d, steps, worst


def semigroup_flow(spec: GeneratorSpec, z, t: float, tol: float = FLOW_TOL) -> FlowResult:
    """Integrate dx/dt = G(x) from x(0) = z up to time t.

    Every accepted step stays in the open disk; steps leaving it are rejected.

    Raises:
        StepUnderflow: The step size collapsed (reports the last good t and x)
    """
    if not t >= 0 or not math.isfinite(t):
        raise ValueError(f"Flow time must be finite and nonnegative, got {t!r}")
    z = complex(disk_point(z))
    x, d, steps, local_error = _semigroup_integrate(spec, np.array([z]), float(t), tol)
    return FlowResult(disk_point(complex(x[0])), float(t), steps, local_error, complex(d[0]))


def semigroup_flow_array(spec: GeneratorSpec, z: np.ndarray, t: float, tol: float = FLOW_TOL,
                         exact: bool = True) -> Tuple[np.ndarray, np.ndarray]:
    """phi_t and its z-derivative on an array, using the closed-form flow when known."""
    z = np.asarray(z, dtype=complex)
    if exact and spec.flow_exact is not None:
        value, derivative = spec.flow_exact(z, t)
        return np.asarray(value, dtype=complex), np.broadcast_to(derivative, z.shape).astype(complex)
    x, d, _, _ = _semigroup_integrate(spec, z, t, tol)
    return x.reshape(z.shape), d.reshape(z.shape)


def _semigroup_newton(G: AnalyticFn, z0: complex, iterations: int = 100) -> Optional[complex]:
    z = complex(z0)
    for _ in range(iterations):
        g = complex(G.value(z))
        if abs(g) < 1e-14:
            break
        dg = complex(G.derivative(z))
        if dg == 0:
            return None
        step = g / dg
        damping = 1.0
        while abs(z - damping * step) >= 1:
            damping /= 2
            if damping < 1e-8:
                return None
        z = z - damping * step
    if abs(z) < 1 - 1e-6 and abs(complex(G.value(z))) < 1e-12:
        return z
    return None


def semigroup_classify(spec: GeneratorSpec, tol: float = FLOW_TOL) -> SemigroupClass:
    """Classify the semigroup generated by G.

    Elliptic when damped Newton from a coarse grid finds an interior zero tau
    (lam = -G'(tau), attracting iff Re lam > 0); otherwise the flow of 0 is
    followed over CLASSIFY_HORIZON until it settles near a boundary point.

    Raises:
        Ambiguous: No interior zero and the flow has not settled by t = 50
    """
    grid = _fn_sample_grid(0.99, 12, 48)
    values = np.asarray(spec.G.value(grid), dtype=complex)
    if np.all(values == 0) and np.all(np.asarray(spec.G.derivative(grid)) == 0):
        return SemigroupClass('trivial', None, 0j, False)
    for start in grid[np.argsort(np.abs(values), kind='stable')[:8]]:
        zero = _semigroup_newton(spec.G, start)
        if zero is not None:
            lam = -complex(spec.G.derivative(zero))
            return SemigroupClass('elliptic', disk_point(zero), lam, lam.real > 0)

    x = 0j
    elapsed = 0.0
    tail = []
    for horizon in CLASSIFY_HORIZON:
        stalled = False
        try:
            state, _, _, _ = _semigroup_integrate(spec, np.array([x]), horizon - elapsed, tol)
            current = complex(state[0])
        except StepUnderflow as e:
            current = complex(np.ravel(e.x)[0])
            stalled = True
        elapsed = horizon
        if tail and abs(current) > 0.9:
            previous = tail[-1][1]
            turn = abs(math.remainder(np.angle(current) - np.angle(previous), 2 * math.pi))
            if turn < 1e-3:
                return SemigroupClass('non_elliptic', disk_point(current, boundary=True), None, True)
        tail.append((horizon, current))
        x = current
        if stalled:
            break
    raise Ambiguous(f"Flow of 0 under {spec.label} did not settle by t = {tail[-1][0]:g}", tail[-3:])


def _semigroup_guard(G: AnalyticFn, zeta: np.ndarray, tau: Optional[complex] = None) -> np.ndarray:
    values = G.value(zeta)
    small = np.abs(values) < 1e-300
    if tau is not None:
        small &= np.abs(zeta - tau) > 1e-12
    if np.any(small):
        raise ValueError(f"Integration path crosses a zero of the generator near {complex(zeta[small][0])!r}")
    return values


def _semigroup_local_series(R: Callable, tau: complex, terms: int = 48) -> np.ndarray:
    # Taylor coefficients of R at tau from samples on a circle inside the disk
    radius = 0.5 * (1 - abs(tau))
    count = 2 * terms
    theta = 2 * np.pi * np.arange(count) / count
    samples = R(tau + radius * np.exp(1j * theta))
    coefficients = np.fft.fft(samples) / count
    return coefficients[:terms] / radius ** np.arange(terms)


def semigroup_koenigs_map(spec: GeneratorSpec, klass: Optional[SemigroupClass] = None,
                          tol: float = KOENIGS_TOL) -> AnalyticFn:
    """Koenigs map by path integration.

    Elliptic: h(z) = (z - tau) exp(∫_tau^z R) with R = -lam / G - 1 / (zeta - tau),
    normalized by h(tau) = 0, h'(tau) = 1; inside the hyperbolic ball of
    radius 0.1 around tau the local series of R is used.
    Non-elliptic: h(z) = ∫_0^z i / G.

    Raises:
        ValueError: Trivial semigroup, or a path crossing a zero of G
    """
    klass = klass or semigroup_classify(spec)
    G = spec.G
    if klass.kind == 'trivial':
        raise ValueError("The trivial semigroup has no Koenigs map")
    if klass.kind == 'non_elliptic':
        def integrand(zeta):
            return 1j / _semigroup_guard(G, zeta)

        def value(z):
            result = quadrature_path_integral(integrand, 0j, _disk_as_input(z), tol)
            return result if isinstance(z, np.ndarray) else complex(result[0])

        def derivative(z):
            return 1j / G.value(_disk_as_input(z))

        return fn_from_closed_form(f'koenigs({spec.label})', value, derivative, foci=[complex(klass.dw_point)])

    tau = complex(klass.dw_point)
    lam = klass.lam
    if lam == 0:
        raise ValueError(f"Elliptic generator {spec.label} has G'(tau) = 0")

    def residual(zeta):
        return -lam / _semigroup_guard(G, zeta, tau) - 1 / (zeta - tau)

    series = _semigroup_local_series(residual, tau)
    primitive = np.concatenate([[0], series / np.arange(1, len(series) + 1)])
    ball = math.tanh(KOENIGS_BALL)

    def exit_point(z):
        # Point where the segment [tau, z] leaves the hyperbolic ball
        lo, hi = np.zeros(z.shape), np.ones(z.shape)
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            outside = np.abs(disk_mobius_jet(tau, tau + mid * (z - tau))[0]) >= ball
            hi = np.where(outside, mid, hi)
            lo = np.where(outside, lo, mid)
        return tau + lo * (z - tau)

    def log_ratio(z):
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        near = np.abs(disk_mobius_jet(tau, z)[0]) < ball
        result = P.polyval(z - tau, primitive)
        far = ~near
        if np.any(far):
            exit_at = exit_point(z[far])
            result[far] = P.polyval(exit_at - tau, primitive) + quadrature_path_integral(residual, exit_at, z[far], tol)
        return result, near

    def residual_at(z, near):
        out = np.empty(z.shape, dtype=complex)
        out[near] = P.polyval(z[near] - tau, series)
        if np.any(~near):
            out[~near] = residual(z[~near])
        return out

    def value(z):
        scalar = not isinstance(z, np.ndarray)
        flat = np.atleast_1d(_disk_as_input(z)).ravel()
        exponent, _ = log_ratio(flat)
        result = (flat - tau) * np.exp(exponent)
        return complex(result[0]) if scalar else result.reshape(np.shape(z))

    def derivative(z):
        scalar = not isinstance(z, np.ndarray)
        flat = np.atleast_1d(_disk_as_input(z)).ravel()
        exponent, near = log_ratio(flat)
        result = np.exp(exponent) * (1 + (flat - tau) * residual_at(flat, near))
        return complex(result[0]) if scalar else result.reshape(np.shape(z))

    return fn_from_closed_form(f'koenigs({spec.label})', value, derivative)


def semigroup_gamma_symbol(spec: GeneratorSpec, klass: Optional[SemigroupClass] = None,
                           tol: float = KOENIGS_TOL) -> AnalyticFn:
    """gamma(z) = ∫_tau^z (zeta - tau) / G(zeta) (elliptic); the Koenigs map otherwise."""
    klass = klass or semigroup_classify(spec)
    if klass.kind == 'trivial':
        raise ValueError("The trivial semigroup has no gamma symbol")
    if klass.kind == 'non_elliptic':
        h = semigroup_koenigs_map(spec, klass, tol)
        return h._replace(label=f'gamma({spec.label})')
    tau = complex(klass.dw_point)
    lam = klass.lam
    if lam == 0:
        raise ValueError(f"Elliptic generator {spec.label} has G'(tau) = 0")

    def integrand(zeta):
        zeta = np.asarray(zeta, dtype=complex)
        at_tau = np.abs(zeta - tau) < 1e-14
        G = _semigroup_guard(spec.G, zeta, tau)
        safe = np.where(at_tau, 1.0, G)
        return np.where(at_tau, -1 / lam, (zeta - tau) / safe)

    def value(z):
        result = quadrature_path_integral(integrand, tau, _disk_as_input(z), tol)
        return result.reshape(np.shape(z)) if isinstance(z, np.ndarray) else complex(result[0])

    def derivative(z):
        if isinstance(z, np.ndarray):
            return integrand(z)
        return complex(integrand(np.array([disk_as_complex(z)]))[0])

    return fn_from_closed_form(f'gamma({spec.label})', value, derivative)


def semigroup_log_koenigs(generator, w0=-1j) -> AnalyticFn:
    """H = log(h - w0) for the Koenigs map h of a generator (closed form when known)."""
    spec = semigroup_generator(generator)
    h = spec.koenigs_exact if spec.koenigs_exact is not None else semigroup_koenigs_map(spec)
    H = fn_log_koenigs(h, w0)
    return H._replace(label=f'H({spec.label})')


def semigroup_bloch_condition_profile(spec: GeneratorSpec, log_weighted: bool = False,
                                      radii: Sequence[float] = BLOCH_RADII,
                                      angles: int = BLOCH_ANGLES) -> SupProfile:
    """Per-radius sup of (1 - |z|²) / |G(z)|, times log(1 / (1 - |z|²)) when log_weighted.

    Radii whose circle meets the hyperbolic ball of radius 0.1 around an
    interior Denjoy-Wolff point are skipped and listed in `excluded`.

    Raises:
        ValueError: G vanishes on a sampled circle
    """
    tau = spec.tau
    if tau is None:
        klass = semigroup_classify(spec)
        tau = complex(klass.dw_point) if klass.dw_point is not None else None
    theta = 2 * np.pi * np.arange(angles) / angles
    kept, values, excluded = [], [], []
    best_value, best_point = -math.inf, 0j
    for r in sorted(float(r) for r in radii):
        z = r * np.exp(1j * theta)
        if tau is not None and abs(tau) < 1:
            if np.min(np.abs(disk_mobius_jet(tau, z)[0])) < math.tanh(KOENIGS_BALL):
                excluded.append(r)
                continue
        modulus = np.abs(spec.G.value(z))
        if np.min(modulus) < 1e-14:
            raise ValueError(f"Generator {spec.label} vanishes on |z| = {r:g}")
        weight = 1 - r * r
        row = weight / modulus
        if log_weighted:
            row = row * math.log(1 / weight)
        j = int(np.argmax(row))
        kept.append(r)
        values.append(float(row[j]))
        if row[j] > best_value:
            best_value, best_point = float(row[j]), complex(z[j])
    if not kept:
        raise ValueError("Every radius was excluded around the Denjoy-Wolff point")
    slope = quadrature_profile_slope(kept, values)
    return SupProfile(tuple(kept), tuple(values), best_value, disk_point(best_point), slope, tuple(excluded))


def semigroup_bloch_verdict(profile: SupProfile, threshold: float = 0.1) -> str:
    """'holds' when the profile decays (slope < -threshold), 'fails' when it grows."""
    if profile.slope < -threshold:
        return 'holds'
    if profile.slope > threshold:
        return 'fails'
    return 'inconclusive'


### OPERATORS ###
# Composition operators C_phi f = f∘phi, Volterra operators T_g f = ∫_0^z f g',
# trend-based symbol classification, the strong continuity curve of a
# semigroup and the recursive witness construction for T_g.

NormRatioReport = namedtuple('NormRatioReport', ['max_ratio', 'bound_rhs', 'constant', 'ratios', 'within_bound'])

# bounded is True when a sufficient condition applies, None when none does
BoundednessReport = namedtuple('BoundednessReport', ['bounded', 'case', 'bound_rhs'])

# Verdicts are 'consistent', 'inconsistent' or 'inconclusive'
SymbolClassReport = namedtuple('SymbolClassReport', ['bounded_flag', 'compact_flag', 'evidence'])

HypothesisReport = namedtuple('HypothesisReport', ['holds', 'm0_slope', 'betas', 'beta_slopes'])

ContinuityCurve = namedtuple('ContinuityCurve', ['times', 'norms', 'slope'])

WitnessGrids = namedtuple(
    'WitnessGrids',
    ['levels', 'centers', 'ring_angles', 'focus_offsets', 'tol', 'depth_floor', 'slack'],
    defaults=[12, 128, 256, 4, 1e-4, 1e-9, 0.05],
)

WitnessState = namedtuple(
    'WitnessState',
    ['n', 'coefficients', 'centers', 'arcs', 'thresholds', 'partial_norm', 'margins', 'hypothesis', 'norms'],
    defaults=[(), None, ()],
)

COMPOSITION_CONSTANT = 4.0
WITNESS_CONSTANT = 1.5
# log² at (p, s, alpha) = (2, 5, 1): the tail of beta_w on long arcs decays like (d / |I|)^3
WITNESS_ACCEPTANCE = (2, 5, 1)
TREND_THRESHOLD = 0.1
CONTINUITY_RADII = SUP_RADII + (0.9999, 0.99999)
WITNESS_FAMILIES = ('beta', 'midpoint')


class SearchExhausted(ValueError):
    """The witness grids could not certify a selection; carries the tightest margins."""

    def __init__(self, message: str, margins: Dict[str, Any], state: 'WitnessState'):
        super().__init__(message)
        self.margins = margins
        self.state = state


def _operator_pullback_foci(map_jet: Callable, foci: Sequence[complex], samples: int = 1024) -> List[complex]:
    # Boundary points where the self-map comes within 0.1 of a focus of f; the
    # scale is the distance left over after the sampling radius, over |phi'|
    if not foci:
        return []
    radius = 1 - QUADRATURE_DEPTH
    step = 2 * math.pi / samples
    theta = step * np.arange(samples)
    image, _ = map_jet(radius * np.exp(1j * theta))
    result = []
    for q in foci:
        distance = np.abs(image - q)
        minima = np.flatnonzero((distance <= np.roll(distance, 1)) & (distance <= np.roll(distance, -1))
                                & (distance < 0.1))
        for j in minima:
            lo, hi = theta[j] - step, theta[j] + step
            for _ in range(40):
                m1, m2 = lo + (hi - lo) / 3, hi - (hi - lo) / 3
                d1, d2 = np.abs(map_jet(radius * np.exp(1j * np.array([m1, m2])))[0] - q)
                if d1 < d2:
                    hi = m2
                else:
                    lo = m1
            best = 0.5 * (lo + hi)
            value, slope = map_jet(radius * np.exp(1j * np.array([best])))
            stretch = max(abs(complex(slope[0])), 1e-12)
            gap = max(abs(complex(value[0]) - q) - (1 - radius) * stretch, 0.0)
            result.append((1 + gap / stretch) * complex(math.cos(best), math.sin(best)))
    return result


def operator_compose(phi: AnalyticFn, f: AnalyticFn) -> AnalyticFn:
    """C_phi f = f∘phi.

    Taylor forms are composed as series when sup |phi| on its working circle
    stays below f.radius * COMPOSE_SAFETY; every other pair is evaluated
    through the chain rule.

    Raises:
        ValueError: phi leaves the disk at a sample point
    """
    sample = _fn_sample_grid(COMPOSE_SAFETY, 16, 64)
    image = np.asarray(phi.value(sample), dtype=complex)
    outside = ~(np.abs(image) < 1)
    if np.any(outside):
        bad = complex(sample[outside][0])
        raise ValueError(f"{phi.label} is not a self-map: |phi({bad:.6g})| = {abs(complex(image[outside][0])):.6g}")
    if fn_is_constant(f):
        return f
    if f.coefficients is not None and phi.coefficients is not None:
        theta = 2 * np.pi * np.arange(256) / 256
        reach = float(np.max(np.abs(phi.value(phi.radius * np.exp(1j * theta)))))
        if reach <= f.radius * COMPOSE_SAFETY:
            return fn_taylor_compose(f, phi)

    def value(z):
        return f.value(phi.value(z))

    def derivative(z):
        return f.derivative(phi.value(z)) * phi.derivative(z)

    def jet(z):
        return phi.value(z), phi.derivative(z)

    foci = list(phi.foci) + _operator_pullback_foci(jet, f.foci)
    return fn_from_closed_form(f'{f.label}∘{phi.label}', value, derivative, foci=foci)


def operator_composition_rhs(phi: AnalyticFn, alpha: float) -> float:
    """log(e / (1 - |phi(0)|)) when alpha = 0, (1 / (1 - |phi(0)|))^alpha otherwise."""
    c = abs(complex(phi.value(0j)))
    if alpha == 0:
        return math.log(math.e / (1 - c))
    return (1 / (1 - c)) ** alpha


def operator_composition_bounded_check(params: SpaceParams, univalent: bool, phi: Optional[AnalyticFn] = None) -> BoundednessReport:
    """Sufficient conditions for C_phi to be bounded on M_alpha(D^p_s).

    Any analytic self-map works when s > p - 1; univalent ones also work
    for p - 2 < s <= p - 1 (p >= 2) or 0 <= s <= p - 1 (1 < p < 2).
    """
    p, s, alpha = params.p, params.s, params.alpha
    rhs = operator_composition_rhs(phi, alpha) if phi is not None else None
    if not (p > 1 and s > p - 2 and 0 <= alpha < (s - (p - 2)) / p):
        return BoundednessReport(None, 'outside_range', rhs)
    if s > p - 1:
        return BoundednessReport(True, 'any_symbol', rhs)
    if univalent and ((p >= 2 and s <= p - 1) or (1 < p < 2 and 0 <= s <= p - 1)):
        return BoundednessReport(True, 'univalent_symbol', rhs)
    return BoundednessReport(None, 'not_covered', rhs)


def _operator_full_norm(f: AnalyticFn, params: SpaceParams, form: str, tol: float,
                        radii: Sequence[float], angles: int) -> float:
    seminorm = space_mads_seminorm(f, params, form, None, tol, radii, angles)
    return abs(complex(f.value(0j))) + seminorm.value


def operator_composition_norm_probe(phi: AnalyticFn, params: SpaceParams, catalogue: Sequence = NORM_CATALOGUE,
                                    form: str = 'invariant', tol: float = QUADRATURE_TOL,
                                    radii: Sequence[float] = SUP_RADII, angles: int = SUP_ANGLES,
                                    constant: float = COMPOSITION_CONSTANT,
                                    univalent: Optional[bool] = None) -> NormRatioReport:
    """Largest ||C_phi f|| / ||f|| over a function catalogue, next to the bound's right-hand side.

    Norms are |f(0)| + the M_alpha seminorm. within_bound records whether
    max_ratio <= constant * bound_rhs.

    Raises:
        ValueError: Inadmissible parameters, or no sufficient condition covers phi
    """
    if not params.admissible:
        raise ValueError(f"Composition norm check needs admissible parameters, got {tuple(params[:3])}")
    if univalent is None and params.s <= params.p - 1:
        univalent = fn_univalence_probe(phi).injective_on_mesh
    check = operator_composition_bounded_check(params, bool(univalent), phi)
    if check.bounded is None:
        raise ValueError(f"No boundedness condition covers {phi.label} on {tuple(params[:3])} ({check.case})")
    ratios = {}
    for item in catalogue:
        f = fn_catalogue_get(item) if isinstance(item, str) else item
        base = _operator_full_norm(f, params, form, tol, radii, angles)
        if base == 0:
            continue
        image = _operator_full_norm(operator_compose(phi, f), params, form, tol, radii, angles)
        ratios[f.label] = image / base
    max_ratio = max(ratios.values()) if ratios else 0.0
    return NormRatioReport(max_ratio, check.bound_rhs, constant, ratios, max_ratio <= constant * check.bound_rhs)


def operator_volterra_apply(g: AnalyticFn, f: AnalyticFn, tol: float = 1e-12) -> AnalyticFn:
    """T_g f(z) = ∫_0^z f(zeta) g'(zeta) dzeta.

    Exact on polynomials (series product and primitive); otherwise the value
    is a radial Gauss-Legendre integral and the derivative is f g' exactly.
    """
    label = f'T[{g.label}]({f.label})'
    if fn_is_constant(g):
        return fn_constant(0)._replace(label=label)
    if (g.coefficients is not None and f.coefficients is not None
            and g.tail_bound == 0 and f.tail_bound == 0):
        product = np.convolve(f.coefficients, P.polyder(g.coefficients))
        return fn_from_taylor(P.polyint(product), label=label)

    def integrand(zeta):
        return f.value(zeta) * g.derivative(zeta)

    def value(z):
        z = _disk_as_input(z)
        result = quadrature_path_integral(integrand, 0j, z, tol)
        return result if isinstance(z, np.ndarray) else complex(result[0])

    def derivative(z):
        return f.value(z) * g.derivative(z)

    return fn_from_closed_form(label, value, derivative)


def _operator_bounded_verdict(profile: SupProfile, definite: bool = True) -> str:
    if math.isnan(profile.slope):
        return 'inconclusive'
    if profile.slope <= TREND_THRESHOLD:
        return 'consistent'
    return 'inconsistent' if definite else 'inconclusive'


def _operator_compact_verdict(profile: SupProfile, definite: bool = True) -> str:
    if math.isnan(profile.slope):
        return 'inconclusive'
    if profile.slope < -TREND_THRESHOLD:
        return 'consistent'
    if not definite:
        return 'inconclusive'
    if profile.slope > TREND_THRESHOLD or profile.values[-1] >= 0.5 * max(profile.values):
        return 'inconsistent'
    return 'inconclusive'


def operator_volterra_symbol_class(g: AnalyticFn, params: SpaceParams, univalent_hint: bool = False,
                                   tol: float = QUADRATURE_TOL, radii: Sequence[float] = SUP_RADII,
                                   angles: int = SUP_ANGLES) -> SymbolClassReport:
    """Trend verdicts for boundedness and compactness of T_g on M_alpha(D^p_s).

    alpha = 0: F_log(p, p - 2, s - (p - 2)) profile (bounded iff finite,
    compact iff little-o). alpha > 0 with univalent_hint: M_0(D^p_s) profile.
    alpha > 0 otherwise: the sufficient condition g in M_0(D^p_{s - beta}),
    which can only confirm.
    """
    if not params.admissible:
        raise ValueError(f"Symbol classification needs admissible parameters, got {tuple(params[:3])}")
    if fn_is_constant(g):
        return SymbolClassReport('consistent', 'consistent', {'rule': 'constant', 'detail': 'T_g = 0'})
    p, s, alpha = params.p, params.s, params.alpha
    definite = True
    if alpha == 0:
        shifted = s - (p - 2)
        f_log = space_f_family_norm(g, p, p - 2, shifted, True, tol, radii, angles)
        f_plain = space_f_family_norm(g, p, p - 2, shifted, False, tol, radii, angles)
        evidence = {'rule': 'f_log', 'f_log': space_norm_to_dict(f_log), 'f_plain': space_norm_to_dict(f_plain)}
        profile = f_log.profile
    elif univalent_hint:
        m0 = space_mads_seminorm(g, space_params(p, s, 0), 'invariant', None, tol, radii, angles)
        evidence = {'rule': 'm0', 'm0': space_norm_to_dict(m0)}
        profile = m0.profile
    else:
        beta = min((s - (p - 2)) / 2, s)
        if not beta > 0:
            return SymbolClassReport('inconclusive', 'inconclusive', {'rule': 'none', 'detail': 'no beta > 0 available'})
        m0 = space_mads_seminorm(g, space_params(p, s - beta, 0), 'invariant', None, tol, radii, angles)
        evidence = {'rule': 'm0_shifted', 'beta': beta, 'm0_shifted': space_norm_to_dict(m0)}
        profile = m0.profile
        definite = False
    evidence['littleo_profile'] = space_profile_to_dict(profile)
    return SymbolClassReport(
        _operator_bounded_verdict(profile, definite),
        _operator_compact_verdict(profile, definite),
        evidence,
    )


def operator_flow_difference(spec: GeneratorSpec, f: AnalyticFn, t: float, exact: bool = True) -> AnalyticFn:
    """F = f∘phi_t - f with F' = f'(phi_t) phi_t' - f'."""
    def value(z):
        z = np.asarray(_disk_as_input(z), dtype=complex)
        phi, _ = semigroup_flow_array(spec, z, t, exact=exact)
        return f.value(phi) - f.value(z)

    def derivative(z):
        z = np.asarray(_disk_as_input(z), dtype=complex)
        phi, dphi = semigroup_flow_array(spec, z, t, exact=exact)
        return f.derivative(phi) * dphi - f.derivative(z)

    def jet(z):
        return semigroup_flow_array(spec, z, t, exact=exact)

    foci = list(f.foci) + _operator_pullback_foci(jet, f.foci)
    return fn_from_closed_form(f'{f.label}∘phi_{t:g} - {f.label}', value, derivative, foci=foci)


def operator_strong_continuity_curve(spec: GeneratorSpec, f: AnalyticFn, params: SpaceParams,
                                     times: Sequence[float], form: str = 'invariant',
                                     tol: float = QUADRATURE_TOL, radii: Sequence[float] = CONTINUITY_RADII,
                                     angles: int = SUP_ANGLES, exact: bool = True) -> ContinuityCurve:
    """||f∘phi_t - f|| per t, with |F(0)| + the M_alpha seminorm as norm.

    The slope is fitted on log-log axes against 1/t over t > 0: negative
    means the curve decays as t goes to 0.
    """
    if not params.admissible:
        raise ValueError(f"Continuity curve needs admissible parameters, got {tuple(params[:3])}")
    times = [float(t) for t in times]
    if any(not t >= 0 for t in times):
        raise ValueError(f"Times must be nonnegative, got {times!r}")
    norms = []
    for t in times:
        if t == 0:
            norms.append(0.0)
            continue
        difference = operator_flow_difference(spec, f, t, exact)
        norms.append(_operator_full_norm(difference, params, form, tol, radii, angles))
    positive = [(1 / t, v) for t, v in zip(times, norms) if t > 0]
    slope = quadrature_trend_slope([x for x, _ in positive], [v for _, v in positive]) if positive else float('nan')
    return ContinuityCurve(tuple(times), tuple(norms), slope)


def operator_witness_hypothesis(g: AnalyticFn, params: SpaceParams, radii: Sequence[float] = SUP_RADII,
                                angles: int = 16, tol: float = 1e-4) -> HypothesisReport:
    """Numeric check that g lies in every M_beta(D^p_s), beta > 0, but not in M_0(D^p_s).

    Holds when the M_0 profile grows (slope > TREND_THRESHOLD) while the
    profiles on the beta ladder do not.
    """
    p, s = params.p, params.s
    top = (s - (p - 2)) / p
    m0 = space_littleo_profile(g, SpaceSelector('mads', space_params(p, s, 0)), radii, angles, tol)
    betas = (top / 4, top / 2, 3 * top / 4)
    slopes = tuple(
        space_littleo_profile(g, SpaceSelector('mads', space_params(p, s, beta)), radii, angles, tol).slope
        for beta in betas
    )
    holds = m0.slope > TREND_THRESHOLD and all(slope <= TREND_THRESHOLD for slope in slopes)
    return HypothesisReport(bool(holds), m0.slope, betas, slopes)


def _witness_arcs(lengths: Sequence[float], foci: Sequence[float], grids: WitnessGrids,
                  uniform: bool = True) -> List[ArcInterval]:
    # Offsets around each focus first, then uniform centers at spacing length / 4 (capped)
    arcs, seen = [], set()
    for length in lengths:
        if length < grids.depth_floor:
            continue
        length = min(length, 1.0)
        if length == 1.0:
            centers = [0.0]
        else:
            centers = [focus + k * math.pi * length / 2
                       for focus in foci for k in range(-grids.focus_offsets, grids.focus_offsets + 1)]
            count = int(min(grids.centers, max(1, math.ceil(4 / length)))) if uniform else 0
            centers += [2 * math.pi * j / count for j in range(count)]
        for center in centers:
            arc = arc_create(center, length)
            key = (round(arc.center_angle, 12), arc.length)
            if key not in seen:
                seen.add(key)
                arcs.append(arc)
    return arcs


def _witness_sup(functional: Callable, arcs: Sequence[ArcInterval],
                 stop_above: float = math.inf) -> Tuple[float, Optional[ArcInterval]]:
    # Stops at the first arc whose value exceeds stop_above
    best, best_arc = -math.inf, None
    for arc in arcs:
        value = functional(arc)
        if value > best:
            best, best_arc = value, arc
        if best > stop_above:
            break
    return best, best_arc


def _witness_basis(w: complex, params: SpaceParams, family: str) -> AnalyticFn:
    if family == 'midpoint':
        return fn_midpoint_log(w)
    return fn_beta_test(w, params)


def operator_witness_construct(g: AnalyticFn, params: SpaceParams, n_max: int = 3,
                               grids: Optional[WitnessGrids] = None, family: str = 'beta',
                               hypothesis: Optional[HypothesisReport] = None,
                               check_hypothesis: bool = True) -> WitnessState:
    """Build F_n = sum a_k beta_{w_k} such that T_g F_n keeps a box functional >= 1/2 on shrinking arcs.

    Base case a_0 = 1, w_0 = 1, I_0 = T, delta_0 = 1, F_0 = 1. Each round picks
    a threshold delta_n where F_{n-1} is small on short arcs, a center w_n deep
    enough that beta_{w_n} is small on long arcs but M_n >= 2^n on short ones,
    the maximizing arc I_n, and a_n = 1 / M_n. All box functionals use the
    normalizer |I|^-(s - (p(alpha + 1) - 2)).

    On arcs longer than delta_n the box functional of beta_{w_n} must stay
    under max(1, (M_n 2^-n)^p), so that a_n beta_{w_n} adds at most 2^-n to
    the norm there. Depths halve from delta_n / 2 down to grids.depth_floor.

    Args:
        g: Volterra symbol
        params: Admissible parameters; alpha > 0 unless family is 'midpoint'
        n_max: Number of rounds
        grids: Search grids
        family: 'beta' (beta_w^alpha) or 'midpoint' (midpoint log functions)
        hypothesis: Precomputed hypothesis report
        check_hypothesis: Run operator_witness_hypothesis when none is given

    Returns:
        WitnessState after n_max rounds, with per-round margins

    Raises:
        SearchExhausted: A selection or a certified property failed on the grids
    """
    grids = grids or WitnessGrids()
    if family not in WITNESS_FAMILIES:
        raise ValueError(f"Unknown witness family: {family!r}")
    if not params.admissible:
        raise ValueError(f"Witness construction needs admissible parameters, got {tuple(params[:3])}")
    if family == 'beta' and not params.alpha > 0:
        raise ValueError(f"The beta family needs alpha > 0, got {params.alpha!r}")
    if n_max < 0:
        raise ValueError(f"n_max must be nonnegative, got {n_max!r}")
    p, s, alpha = params.p, params.s, params.alpha
    exponent = s - (p * (alpha + 1) - 2)
    if check_hypothesis and hypothesis is None:
        hypothesis = operator_witness_hypothesis(g, params)

    def box(F: AnalyticFn, arc: ArcInterval) -> float:
        def integrand(z):
            return np.abs(F.value(z) * g.derivative(z)) ** p
        result = quadrature_integrate_box(integrand, CarlesonBox(arc), s, grids.tol, foci=g.foci + F.foci)
        return result.value / arc.length ** exponent

    def ladder(top: float) -> List[float]:
        return [top * 2.0 ** -i for i in range(grids.levels + 1)]

    ring_theta = 2 * np.pi * np.arange(grids.ring_angles) / grids.ring_angles
    edge = 0.999 * np.exp(1j * ring_theta)
    theta_g = float(ring_theta[int(np.argmax(np.abs(g.derivative(edge))))])

    coefficients, centers, arcs, thresholds = [1.0], [1 + 0j], [ArcInterval(0.0, 1.0)], [1.0]
    basis = [fn_constant(1.0)]
    F = basis[0]
    partial, _ = _witness_sup(lambda arc: box(F, arc), _witness_arcs(ladder(1.0), [theta_g], grids))
    partial = partial ** (1 / p)
    margins, norms = [], [partial]
    state = WitnessState(0, tuple(coefficients), tuple(centers), tuple(arcs), tuple(thresholds),
                         partial, tuple(margins), hypothesis, tuple(norms))

    for n in range(1, n_max + 1):
        foci = [theta_g] + [math.atan2(w.imag, w.real) for w in centers[1:]]

        delta, sup_small, tightest = None, None, math.inf
        for j in range(1, grids.levels + 1):
            candidate = arcs[-1].length * 2.0 ** -j
            if candidate < grids.depth_floor:
                break
            value, _ = _witness_sup(lambda arc: box(F, arc), _witness_arcs(ladder(candidate), foci, grids), 2.0 ** -p)
            if value <= 2.0 ** -p:
                delta, sup_small = candidate, value
                break
            tightest = min(tightest, value)
        if delta is None:
            raise SearchExhausted(
                f"Round {n}: no threshold below {arcs[-1].length:.3g} keeps F_{n - 1} under 2^-p on short arcs",
                {'round': n, 'eq1': 2.0 ** -p - tightest}, state)

        chosen = None
        best_growth, best_long = -math.inf, math.inf
        depth = delta / 2
        while depth >= grids.depth_floor:
            angles = np.concatenate([ring_theta, foci])
            candidates = (1 - depth) * np.exp(1j * angles)
            scores = [box(_witness_basis(w, params, family), disk_box_of_point(w).arc) for w in candidates]
            k = int(np.argmax(scores))
            w = complex(candidates[k])
            beta = _witness_basis(w, params, family)
            if scores[k] ** (1 / p) >= 2.0 ** (n - 1):
                focus = [float(angles[k])]
                short_lengths = [delta * 2.0 ** -i for i in range(int(math.ceil(math.log2(delta / depth))) + 3)]
                peak, peak_arc = _witness_sup(lambda arc: box(beta, arc),
                                              _witness_arcs(short_lengths, focus, grids, uniform=False))
                M = peak ** (1 / p)
                best_growth = max(best_growth, M - 2.0 ** n)
                if M >= 2.0 ** n:
                    long_lengths = sorted({min(1.0, delta * 2.0 ** i) for i in range(64) if delta * 2.0 ** (i - 1) < 1})
                    # a_n^p times this cap is 2^-np, which is all the norm bound needs
                    long_cap = max(1.0, (M * 2.0 ** -n) ** p)
                    sup_long, _ = _witness_sup(lambda arc: box(beta, arc),
                                               _witness_arcs(long_lengths, focus + foci, grids), long_cap)
                    best_long = min(best_long, sup_long - long_cap)
                    if sup_long <= long_cap:
                        chosen = (w, beta, M, peak_arc, sup_long, long_cap, depth)
                        break
            depth /= 2
        if chosen is None:
            raise SearchExhausted(
                f"Round {n}: no center down to depth {grids.depth_floor:g} reaches M_n >= 2^{n} with long arcs under the cap",
                {'round': n, 'eq1': 2.0 ** -p - sup_small, 'growth': best_growth, 'eq2': -best_long}, state)

        w, beta, M, arc_n, sup_long, long_cap, depth = chosen
        a_n = 1 / M
        coefficients.append(a_n)
        centers.append(w)
        arcs.append(arc_n)
        thresholds.append(delta)
        basis.append(beta)
        F = fn_combine(list(zip(coefficients, basis)), label=f'F_{n}')

        lower = box(F, arc_n) ** (1 / p)
        levels = int(math.ceil(math.log2(1 / arc_n.length))) + 2
        norm_arcs = _witness_arcs([2.0 ** -i for i in range(levels + 1)], foci + [math.atan2(w.imag, w.real)], grids)
        partial_new, _ = _witness_sup(lambda arc: box(F, arc), norm_arcs)
        partial_new = partial_new ** (1 / p)
        cap = max(partial + 2.0 ** -n * WITNESS_CONSTANT, WITNESS_CONSTANT)
        record = {
            'round': n,
            'delta': delta,
            'depth': depth,
            'M': M,
            'eq1': 2.0 ** -p - sup_small,
            'eq2': long_cap - sup_long,
            'long_cap': long_cap,
            'growth': M - 2.0 ** n,
            'coefficient': 2.0 ** -n - a_n,
            'arcs': min(arc.length for arc in arcs[:-1]) - delta,
            'box_lower': lower - 0.5,
            'norm_cap': cap - partial_new,
            'slack': grids.slack,
        }
        margins.append(record)
        partial = partial_new
        norms.append(partial)
        state = WitnessState(n, tuple(coefficients), tuple(centers), tuple(arcs), tuple(thresholds),
                             partial, tuple(margins), hypothesis, tuple(norms))
        if not (record['coefficient'] >= 0 and record['arcs'] > 0
                and record['box_lower'] >= -grids.slack and record['norm_cap'] >= -grids.slack):
            raise SearchExhausted(f"Round {n} failed certification", record, state)
    return state


def operator_symbol_class_to_dict(report: SymbolClassReport) -> Dict[str, Any]:
    return {'bounded_flag': report.bounded_flag, 'compact_flag': report.compact_flag, 'evidence': report.evidence}


def operator_witness_to_dict(state: WitnessState) -> Dict[str, Any]:
    """JSON-ready dictionary for a WitnessState."""
    hypothesis = None
    if state.hypothesis is not None:
        hypothesis = {
            'holds': state.hypothesis.holds,
            'm0_slope': _json_float(state.hypothesis.m0_slope),
            'betas': list(state.hypothesis.betas),
            'beta_slopes': [_json_float(x) for x in state.hypothesis.beta_slopes],
        }
    return {
        'n': state.n,
        'coefficients': list(state.coefficients),
        'centers': [[w.real, w.imag] for w in state.centers],
        'arcs': [{'center_angle': arc.center_angle, 'length': arc.length} for arc in state.arcs],
        'thresholds': list(state.thresholds),
        'partial_norm': _json_float(state.partial_norm),
        'norms': [_json_float(x) for x in state.norms],
        'margins': [{key: _json_float(v) if isinstance(v, float) else v for key, v in m.items()}
                    for m in state.margins],
        'hypothesis': hypothesis,
    }


### LAB ###
# Scenario configs (JSON) in, CSV rows and JSON metadata out. Output goes to
# --out, else $DISKLAB_OUTPUT, else ./disklab-out.

Scenario = namedtuple(
    'Scenario',
    ['name', 'pipeline', 'generator', 'space', 'form', 'beta', 'q', 'weight', 'weight_alpha', 'functions',
     'points', 'times', 'radii', 'angles', 'log_weighted', 'univalent_hint', 'n_max', 'grids', 'tol',
     'output', 'config'],
)

PIPELINES = ('norm', 'flow', 'continuity', 'bloch-check', 'symbol-class', 'witness')
NORM_FORMS = MADS_FORMS + ('dps', 'f_family', 'f_log', 'bloch')
PLOT_KINDS = ('profile', 'curve')
VERIFY_LEVELS = ('smoke', 'full')

CSV_COLUMNS = {
    'norm': ['function', 'form', 'p', 's', 'alpha', 'value', 'global_sup', 'attained_re', 'attained_im',
             'slope', 'status'],
    'flow': ['generator', 'z_re', 'z_im', 't', 'value_re', 'value_im', 'derivative_re', 'derivative_im',
             'steps', 'local_error', 'status'],
    'continuity': ['generator', 'function', 't', 'norm', 'status'],
    'bloch-check': ['generator', 'log_weighted', 'r', 'value', 'verdict', 'status'],
    'symbol-class': ['function', 'p', 's', 'alpha', 'bounded_flag', 'compact_flag', 'rule', 'slope', 'status'],
    'witness': ['round', 'coefficient', 'center_re', 'center_im', 'arc_center', 'arc_length', 'threshold',
                'partial_norm', 'status'],
}


class ConfigError(ValueError):
    """Invalid scenario config; `field` names the offending key path."""

    def __init__(self, message: str, field: Optional[str] = None):
        super().__init__(message)
        self.field = field


def lab_get_output_directory(out: Optional[str] = None) -> Path:
    """
    Get the report directory: the --out flag, else DISKLAB_OUTPUT, else ./disklab-out.

    Directory structure:
        $DISKLAB_OUTPUT/
        ├── <output>.csv          # One row per evaluation, with a status column
        ├── <output>.json         # Config, conventions, grids, tolerances, versions
        ├── <output>.<label>.<kind>.dat   # Plot data
        └── verify-<level>.json   # verify summary
    """
    if out:
        return Path(out)
    env_dir = os.environ.get('DISKLAB_OUTPUT')
    if env_dir:
        return Path(env_dir)
    return Path.cwd() / 'disklab-out'


def _lab_number(config: Dict[str, Any], key: str, default, field: Optional[str] = None,
                minimum: Optional[float] = None, integer: bool = False, strict: bool = False):
    field = field or key
    value = config.get(key, default)
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{field} must be a number, got {value!r}", field)
    if integer and int(value) != value:
        raise ConfigError(f"{field} must be an integer, got {value!r}", field)
    if minimum is not None and (value <= minimum if strict else value < minimum):
        relation = '>' if strict else '>='
        raise ConfigError(f"{field} must be {relation} {minimum:g}, got {value!r}", field)
    return int(value) if integer else float(value)


def _lab_list(config: Dict[str, Any], key: str, default) -> list:
    value = config.get(key, default)
    if not isinstance(value, (list, tuple)):
        raise ConfigError(f"{key} must be a list, got {value!r}", key)
    return list(value)


def _lab_flag(config: Dict[str, Any], key: str) -> bool:
    value = config.get(key, False)
    if not isinstance(value, bool):
        raise ConfigError(f"{key} must be true or false, got {value!r}", key)
    return value


def _lab_function(item, index: int, params: SpaceParams) -> AnalyticFn:
    field = f'functions[{index}]'
    if isinstance(item, str):
        try:
            return fn_catalogue_get(item)
        except ValueError as e:
            raise ConfigError(f"{field}: {e}", field)
    if not isinstance(item, dict):
        raise ConfigError(f"{field} must be a name or an object, got {item!r}", field)
    if item.get('kind') not in TEST_FUNCTION_KINDS:
        raise ConfigError(f"{field}.kind must be one of {', '.join(TEST_FUNCTION_KINDS)}, got {item.get('kind')!r}",
                          f'{field}.kind')
    try:
        spec = TestFunctionSpec(
            kind=item['kind'],
            w=disk_as_complex(item.get('w', [0.0, 0.0])),
            n=int(item.get('n', 0)),
            alpha=float(item.get('alpha', 0.0)),
            lam=float(item.get('lam', 0.0)),
            params=params,
            generator=item.get('generator'),
            w0=disk_as_complex(item['w0']) if 'w0' in item else None,
        )
        return fn_make_test(spec)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"{field}: {e}", field)


def lab_load_scenario(path) -> Scenario:
    """Read and validate a scenario config.

    Raises:
        ConfigError: Parse error (with line and column) or an invalid field
    """
    path = Path(path)
    try:
        text = path.read_text(encoding='utf-8')
    except OSError as e:
        raise ConfigError(f"Failed to read config {path}: {e}")
    try:
        config = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}:{e.lineno}:{e.colno}: {e.msg}")
    if not isinstance(config, dict):
        raise ConfigError(f"{path}: config must be a JSON object")

    pipeline = config.get('pipeline')
    if pipeline not in PIPELINES:
        raise ConfigError(f"pipeline must be one of {', '.join(PIPELINES)}, got {pipeline!r}", 'pipeline')
    name = config.get('name', path.stem)
    if not isinstance(name, str) or not name:
        raise ConfigError(f"name must be a non-empty string, got {name!r}", 'name')

    space = config.get('space', {})
    if not isinstance(space, dict):
        raise ConfigError(f"space must be an object, got {space!r}", 'space')
    p = _lab_number(space, 'p', 2.0, 'space.p', minimum=1, strict=True)
    s = _lab_number(space, 's', 1.0, 'space.s')
    alpha = _lab_number(space, 'alpha', 0.0, 'space.alpha', minimum=0)
    params = space_params(p, s, alpha)
    classification = space_admissible_check(params).classification
    if classification == 'invalid':
        raise ConfigError(f"space ({p:g}, {s:g}, {alpha:g}) is outside every M_alpha(D^p_s) range", 'space')
    if pipeline in ('continuity', 'symbol-class', 'witness') and not params.admissible:
        raise ConfigError(f"{pipeline} needs admissible space parameters, got {classification}", 'space.alpha')

    form = config.get('form', 'invariant')
    if form not in NORM_FORMS:
        raise ConfigError(f"form must be one of {', '.join(NORM_FORMS)}, got {form!r}", 'form')
    if pipeline in ('norm', 'continuity') and form in ('box', 'kernel') and not params.admissible:
        raise ConfigError(f"The {form} form needs admissible space parameters", 'form')
    if pipeline == 'continuity' and form not in MADS_FORMS:
        raise ConfigError(f"continuity needs one of {', '.join(MADS_FORMS)}, got {form!r}", 'form')
    weight = config.get('weight', 'alpha_power')
    if weight not in ('alpha_power', 'log'):
        raise ConfigError(f"weight must be alpha_power or log, got {weight!r}", 'weight')

    generator = None
    if pipeline in ('flow', 'continuity', 'bloch-check'):
        if 'generator' not in config:
            raise ConfigError(f"{pipeline} needs a generator", 'generator')
        catalogue = None
        if 'catalogue' in config:
            catalogue_path = Path(config['catalogue'])
            if not catalogue_path.is_absolute():
                catalogue_path = path.parent / catalogue_path
            try:
                catalogue = semigroup_catalogue_load(catalogue_path)
            except ValueError as e:
                raise ConfigError(str(e), 'catalogue')
        try:
            generator = semigroup_generator(config['generator'], catalogue)
        except ValueError as e:
            raise ConfigError(f"generator: {e}", 'generator')

    functions = tuple(_lab_function(item, i, params) for i, item in enumerate(_lab_list(config, 'functions', [])))
    if pipeline in ('norm', 'continuity', 'symbol-class', 'witness') and not functions:
        raise ConfigError(f"{pipeline} needs at least one function", 'functions')

    points = []
    for i, item in enumerate(_lab_list(config, 'points', [[0.5, 0.0]] if pipeline == 'flow' else [])):
        try:
            points.append(disk_as_complex(disk_point(item)))
        except (TypeError, ValueError) as e:
            raise ConfigError(f"points[{i}]: {e}", f'points[{i}]')

    times = []
    for i, t in enumerate(_lab_list(config, 'times', [1.0] if pipeline == 'flow' else [])):
        times.append(_lab_number({'t': t}, 't', None, f'times[{i}]', minimum=0))
    if pipeline in ('flow', 'continuity') and not times:
        raise ConfigError(f"{pipeline} needs times", 'times')

    default_radii = {'bloch-check': BLOCH_RADII, 'continuity': CONTINUITY_RADII}.get(pipeline, SUP_RADII)
    radii = []
    for i, r in enumerate(_lab_list(config, 'radii', list(default_radii))):
        r = _lab_number({'r': r}, 'r', None, f'radii[{i}]', minimum=0)
        if not r < 1:
            raise ConfigError(f"radii[{i}] must be < 1, got {r!r}", f'radii[{i}]')
        radii.append(r)
    angles = _lab_number(config, 'angles', BLOCH_ANGLES if pipeline == 'bloch-check' else SUP_ANGLES,
                         minimum=1, integer=True)

    grids = config.get('grids', {})
    if not isinstance(grids, dict) or set(grids) - set(WitnessGrids._fields):
        raise ConfigError(f"grids must be an object with keys among {', '.join(WitnessGrids._fields)}", 'grids')
    grids = WitnessGrids(**{key: _lab_number(grids, key, None, f'grids.{key}', minimum=0,
                                             integer=key in ('levels', 'centers', 'ring_angles', 'focus_offsets'))
                            for key in grids})

    default_tol = FLOW_TOL if pipeline == 'flow' else QUADRATURE_TOL
    output = config.get('output', name)
    if not isinstance(output, str) or not output or '/' in output:
        raise ConfigError(f"output must be a plain file stem, got {output!r}", 'output')

    return Scenario(
        name=name,
        pipeline=pipeline,
        generator=generator,
        space=params,
        form=form,
        beta=_lab_number(config, 'beta', None, minimum=0, strict=True),
        q=_lab_number(config, 'q', p - 2, minimum=-2, strict=True),
        weight=weight,
        weight_alpha=_lab_number(config, 'weight_alpha', 1.0, minimum=0),
        functions=functions,
        points=tuple(points),
        times=tuple(times),
        radii=tuple(radii),
        angles=angles,
        log_weighted=_lab_flag(config, 'log_weighted'),
        univalent_hint=_lab_flag(config, 'univalent_hint'),
        n_max=_lab_number(config, 'n_max', 3, minimum=0, integer=True),
        grids=grids,
        tol=_lab_number(config, 'tol', default_tol, minimum=0, strict=True),
        output=output,
        config=config,
    )


def _lab_status(e: Exception) -> str:
    return f'error: {type(e).__name__}: {e}'


def _lab_series(label: str, kind: str, quantity: str, x_name: str, y_name: str, x, y) -> Dict[str, Any]:
    return {'label': label, 'kind': kind, 'quantity': quantity, 'x_name': x_name, 'y_name': y_name,
            'x': [_json_float(v) for v in x], 'y': [_json_float(v) for v in y]}


def _lab_run_norm(scenario: Scenario) -> Tuple[List[Dict[str, Any]], List[Dict[str, Any]], Dict[str, Any]]:
    params = scenario.space
    rows, series, estimates = [], [], {}
    for f in scenario.functions:
        row = {'function': f.label, 'form': scenario.form, 'p': params.p, 's': params.s, 'alpha': params.alpha}
        try:
            if scenario.form in MADS_FORMS:
                estimate = space_mads_seminorm(f, params, scenario.form, scenario.beta, scenario.tol,
                                               scenario.radii, scenario.angles)
            elif scenario.form == 'dps':
                estimate = space_dps_norm(f, params.p, params.s, scenario.tol)
            elif scenario.form == 'bloch':
                estimate = space_weighted_bloch_norm(f, scenario.weight, scenario.weight_alpha,
                                                     scenario.radii, scenario.angles)
            else:
                estimate = space_f_family_norm(f, params.p, scenario.q, params.s, scenario.form == 'f_log',
                                               scenario.tol, scenario.radii, scenario.angles)
        except ValueError as e:
            row['status'] = _lab_status(e)
            rows.append(row)
            continue
        profile = estimate.profile
        row.update(value=estimate.value, global_sup=profile.global_sup, attained_re=profile.attained_at.re,
                   attained_im=profile.attained_at.im, slope=profile.slope, status='ok')
        rows.append(row)
        estimates[f.label] = space_norm_to_dict(estimate)
        series.append(_lab_series(f.label, 'profile', f'{scenario.form} functional sup per radius',
                                  'r', 'sup', profile.radii, profile.values))
    return rows, series, {'estimates': estimates}


def _lab_run_flow(scenario: Scenario):
    spec = scenario.generator
    rows, series = [], []
    for z in scenario.points:
        trajectory = []
        for t in scenario.times:
            row = {'generator': spec.label, 'z_re': z.real, 'z_im': z.imag, 't': t}
            try:
                result = semigroup_flow(spec, z, t, scenario.tol)
            except ValueError as e:
                row['status'] = _lab_status(e)
                rows.append(row)
                continue
            row.update(value_re=result.value.re, value_im=result.value.im,
                       derivative_re=result.derivative.real, derivative_im=result.derivative.imag,
                       steps=result.steps, local_error=result.local_error, status='ok')
            rows.append(row)
            trajectory.append((t, abs(complex(result.value))))
        trajectory.sort()
        series.append(_lab_series(f'z={_fn_format_point(z)}', 'curve', '|phi_t(z)|', 't', 'modulus',
                                  [t for t, _ in trajectory], [v for _, v in trajectory]))
    return rows, series, {}


def _lab_run_continuity(scenario: Scenario):
    spec, params = scenario.generator, scenario.space
    rows, series, slopes = [], [], {}
    for f in scenario.functions:
        curve = []
        for t in sorted(scenario.times):
            row = {'generator': spec.label, 'function': f.label, 't': t}
            try:
                result = operator_strong_continuity_curve(spec, f, params, [t], scenario.form, scenario.tol,
                                                          scenario.radii, scenario.angles)
            except ValueError as e:
                row['status'] = _lab_status(e)
                rows.append(row)
                continue
            row.update(norm=result.norms[0], status='ok')
            rows.append(row)
            curve.append((t, result.norms[0]))
        positive = [(1 / t, v) for t, v in curve if t > 0]
        slopes[f.label] = _json_float(quadrature_trend_slope([x for x, _ in positive], [v for _, v in positive])
                                      if positive else float('nan'))
        series.append(_lab_series(f.label, 'curve', '||f o phi_t - f||', 't', 'norm',
                                  [t for t, _ in curve], [v for _, v in curve]))
    return rows, series, {'slopes': slopes}


def _lab_run_bloch(scenario: Scenario):
    spec = scenario.generator
    base = {'generator': spec.label, 'log_weighted': scenario.log_weighted}
    try:
        profile = semigroup_bloch_condition_profile(spec, scenario.log_weighted, scenario.radii, scenario.angles)
    except ValueError as e:
        return [dict(base, status=_lab_status(e))], [], {}
    verdict = semigroup_bloch_verdict(profile)
    values = dict(zip(profile.radii, profile.values))
    rows = []
    for r in sorted(scenario.radii):
        if r in values:
            rows.append(dict(base, r=r, value=values[r], verdict=verdict, status='ok'))
        else:
            rows.append(dict(base, r=r, status='excluded'))
    series = [_lab_series(spec.label, 'profile', 'sup (1-|z|^2)/|G(z)| per radius', 'r', 'sup',
                          profile.radii, profile.values)]
    return rows, series, {'verdict': verdict, 'profile': space_profile_to_dict(profile)}


def _lab_run_symbol_class(scenario: Scenario):
    params = scenario.space
    rows, series, reports = [], [], {}
    for g in scenario.functions:
        row = {'function': g.label, 'p': params.p, 's': params.s, 'alpha': params.alpha}
        try:
            report = operator_volterra_symbol_class(g, params, scenario.univalent_hint, scenario.tol,
                                                    scenario.radii, scenario.angles)
        except ValueError as e:
            row['status'] = _lab_status(e)
            rows.append(row)
            continue
        profile = report.evidence.get('littleo_profile', {})
        row.update(bounded_flag=report.bounded_flag, compact_flag=report.compact_flag,
                   rule=report.evidence['rule'], slope=profile.get('slope', ''), status='ok')
        rows.append(row)
        reports[g.label] = operator_symbol_class_to_dict(report)
        if profile:
            series.append(_lab_series(g.label, 'profile', f"{report.evidence['rule']} functional sup per radius",
                                      'r', 'sup', profile['radii'], profile['values']))
    return rows, series, {'reports': reports}


def _lab_run_witness(scenario: Scenario, on_warning: Optional[Callable[[str], None]] = None):
    g, params = scenario.functions[0], scenario.space
    family = 'beta' if params.alpha > 0 else 'midpoint'
    try:
        hypothesis = operator_witness_hypothesis(g, params, tol=min(scenario.tol * 100, 1e-4))
    except ValueError as e:
        return [{'round': 0, 'status': _lab_status(e)}], [], {}
    if not hypothesis.holds and on_warning is not None:
        on_warning(f"{g.label} fails the numeric hypothesis check (M_0 slope {hypothesis.m0_slope:.3g}, "
                   f"M_beta slopes {', '.join(f'{x:.3g}' for x in hypothesis.beta_slopes)}); running anyway")
    error = None
    try:
        state = operator_witness_construct(g, params, scenario.n_max, scenario.grids, family, hypothesis)
    except SearchExhausted as e:
        state, error = e.state, e
    except ValueError as e:
        return [{'round': 0, 'status': _lab_status(e)}], [], {}
    failed_round = error.margins.get('round', state.n + 1) if error is not None else None
    rows = []
    for k in range(state.n + 1):
        arc = state.arcs[k]
        rows.append({
            'round': k, 'coefficient': state.coefficients[k], 'center_re': state.centers[k].real,
            'center_im': state.centers[k].imag, 'arc_center': arc.center_angle, 'arc_length': arc.length,
            'threshold': state.thresholds[k], 'partial_norm': state.norms[k],
            'status': _lab_status(error) if k == failed_round else 'ok',
        })
    if error is not None and failed_round > state.n:
        rows.append({'round': failed_round, 'status': _lab_status(error)})
    series = [_lab_series(g.label, 'curve', '||T_g F_n|| on searched arcs', 'round', 'partial_norm',
                          range(len(state.norms)), state.norms)]
    summary = {'witness': operator_witness_to_dict(state)}
    if error is not None:
        summary['exhausted'] = {key: _json_float(v) if isinstance(v, float) else v
                                for key, v in error.margins.items()}
    return rows, series, summary


def _lab_format(value) -> str:
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, float):
        return format(value, '.17g')
    return str(value)


def lab_write_csv(path, columns: Sequence[str], rows: Sequence[Dict[str, Any]]) -> None:
    """Write rows with 17 significant digits and '\\n' line endings; missing cells stay empty."""
    with open(path, 'w', encoding='utf-8', newline='') as handle:
        writer = csv.DictWriter(handle, fieldnames=list(columns), lineterminator='\n')
        writer.writeheader()
        for row in rows:
            writer.writerow({key: _lab_format(row[key]) if key in row else '' for key in columns})


def lab_versions() -> Dict[str, str]:
    return {'disklab': __version__, 'numpy': np.__version__, 'python': platform.python_version()}


def lab_run_scenario(scenario: Scenario, out_dir=None, tol: Optional[float] = None,
                     on_warning: Optional[Callable[[str], None]] = None) -> Tuple[Path, Path, Dict[str, Any]]:
    """Run a scenario's pipeline and write <output>.csv and <output>.json.

    Per-row numeric failures are written into the status column; the run
    itself only fails on I/O errors.

    Returns:
        (csv_path, json_path, metadata)
    """
    if tol is not None:
        if not tol > 0:
            raise ValueError(f"Tolerance must be positive, got {tol!r}")
        scenario = scenario._replace(tol=float(tol))
    out_dir = Path(out_dir) if out_dir is not None else lab_get_output_directory()
    out_dir.mkdir(parents=True, exist_ok=True)

    runners = {
        'norm': _lab_run_norm,
        'flow': _lab_run_flow,
        'continuity': _lab_run_continuity,
        'bloch-check': _lab_run_bloch,
        'symbol-class': _lab_run_symbol_class,
    }
    if scenario.pipeline == 'witness':
        rows, series, summary = _lab_run_witness(scenario, on_warning)
    else:
        rows, series, summary = runners[scenario.pipeline](scenario)

    csv_path = out_dir / f'{scenario.output}.csv'
    json_path = out_dir / f'{scenario.output}.json'
    lab_write_csv(csv_path, CSV_COLUMNS[scenario.pipeline], rows)
    failed = sum(1 for row in rows if row.get('status', '').startswith('error'))
    metadata = {
        'name': scenario.name,
        'pipeline': scenario.pipeline,
        'config': scenario.config,
        'conventions': CONVENTIONS,
        'tolerances': {'tol': scenario.tol, 'quadrature_max_cells': QUADRATURE_MAX_CELLS,
                       'quadrature_depth': QUADRATURE_DEPTH},
        'grids': {'radii': list(scenario.radii), 'angles': scenario.angles, 'times': list(scenario.times),
                  'witness': dict(scenario.grids._asdict())},
        'versions': lab_versions(),
        'rows': len(rows),
        'failed_rows': failed,
        'series': series,
        'summary': summary,
    }
    with open(json_path, 'w', encoding='utf-8') as handle:
        json.dump(metadata, handle, indent=2, ensure_ascii=False)
    return csv_path, json_path, metadata


def _lab_safe_label(label: str) -> str:
    return ''.join(c if c.isalnum() or c in '._-' else '_' for c in label)


def lab_emit_plotdata(report, kind: str) -> List[Path]:
    """Write (x, y) columns for every series of a kind in a JSON report.

    Files are named <stem>.<label>.<kind>.dat, with '#' header lines naming
    the quantity and columns; curves are sorted by x. A report without such
    series gets a header-only <stem>.<kind>.dat.

    Raises:
        ValueError: Unknown kind, or an unreadable report
    """
    if kind not in PLOT_KINDS:
        raise ValueError(f"Unknown plot kind: {kind!r}")
    report = Path(report)
    if report.suffix != '.json':
        report = report.with_suffix('.json')
    try:
        with open(report, 'r', encoding='utf-8') as handle:
            metadata = json.load(handle)
    except (OSError, json.JSONDecodeError) as e:
        raise ValueError(f"Failed to read report {report}: {e}")

    selected = [s for s in metadata.get('series', []) if s.get('kind') == kind]
    written = []
    if not selected:
        path = report.with_name(f'{report.stem}.{kind}.dat')
        with open(path, 'w', encoding='utf-8') as handle:
            handle.write(f'# disklab {kind} data for {metadata.get("name", report.stem)}\n')
            handle.write('# no series\n')
        return [path]
    for item in selected:
        path = report.with_name(f'{report.stem}.{_lab_safe_label(item["label"])}.{kind}.dat')
        pairs = list(zip(item['x'], item['y']))
        if kind == 'curve':
            pairs.sort(key=lambda pair: float(pair[0]))
        with open(path, 'w', encoding='utf-8') as handle:
            handle.write(f'# disklab {kind} data for {metadata.get("name", report.stem)}: {item["label"]}\n')
            handle.write(f'# quantity: {item["quantity"]}\n')
            handle.write(f'# columns: {item["x_name"]} {item["y_name"]}\n')
            for x, y in pairs:
                handle.write(f'{_lab_format(x)} {_lab_format(y)}\n')
        written.append(path)
    return written


### VERIFY ###
# The acceptance checks. Each check returns a detail string or raises; smoke
# runs the fast subset on reduced grids.

VerifyCheck = namedtuple('VerifyCheck', ['tag', 'name', 'levels', 'run'])

VerifyResult = namedtuple('VerifyResult', ['tag', 'name', 'ok', 'seconds', 'detail'])


def _verify_assert(condition: bool, message: str) -> None:
    if not condition:
        raise AssertionError(message)


def _verify_points(count: int, radius: float, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    r = radius * np.sqrt(rng.uniform(0, 1, count))
    return r * np.exp(2j * np.pi * rng.uniform(0, 1, count))


def verify_mobius(level: str, tol: float) -> str:
    a = _verify_points(1000, 0.95, 1)
    z = _verify_points(1000, 0.95, 2)
    worst = 0.0
    for center, point in zip(a, z):
        phi, dphi = disk_mobius_jet(center, point)
        back, _ = disk_mobius_jet(center, phi)
        pick = abs((1 - abs(phi) ** 2) - abs(dphi) * (1 - abs(point) ** 2))
        worst = max(worst, abs(back - point), pick)
    _verify_assert(worst < 1e-12, f"residual {worst:.3g}")
    return f"max residual {worst:.3g}"


FLOW_LAW_TIMES = (0.1, 0.5, 1.0)


def verify_flow(level: str, tol: float) -> str:
    z = _verify_points(50, 0.9, 3)
    worst, law = 0.0, 0.0
    for name in ('neg_z', 'parabolic'):
        spec = semigroup_generator(name)
        for t in (0.1, 0.5, 1.0):
            numeric, _ = semigroup_flow_array(spec, z, t, exact=False)
            exact, _ = spec.flow_exact(z, t)
            worst = max(worst, float(np.max(np.abs(numeric - exact))))
        for t in FLOW_LAW_TIMES:
            for s in FLOW_LAW_TIMES:
                inner, _ = semigroup_flow_array(spec, z, s, exact=False)
                composed, _ = semigroup_flow_array(spec, inner, t, exact=False)
                direct, _ = semigroup_flow_array(spec, z, t + s, exact=False)
                law = max(law, float(np.max(np.abs(composed - direct))))
    _verify_assert(worst < 1e-8, f"flow error {worst:.3g}")
    _verify_assert(law < 1e-7, f"semigroup law residual {law:.3g}")
    return f"flow error {worst:.3g}, semigroup law {law:.3g}"


def verify_koenigs(level: str, tol: float) -> str:
    z = _verify_points(50, 0.9, 4)
    elliptic, translation = 0.0, 0.0
    spec = semigroup_generator('neg_2z')
    klass = semigroup_classify(spec)
    h = semigroup_koenigs_map(spec, klass)
    hz = h.value(z)
    for t in FLOW_LAW_TIMES:
        phi, _ = semigroup_flow_array(spec, z, t)
        elliptic = max(elliptic, float(np.max(np.abs(h.value(phi) - np.exp(-klass.lam * t) * hz))))
    spec = semigroup_generator('parabolic')
    h = semigroup_koenigs_map(spec)
    hz = h.value(z)
    for t in FLOW_LAW_TIMES:
        phi, _ = semigroup_flow_array(spec, z, t)
        translation = max(translation, float(np.max(np.abs(h.value(phi) - hz - 1j * t))))
    _verify_assert(elliptic < 1e-6, f"elliptic residual {elliptic:.3g}")
    _verify_assert(translation < 1e-6, f"non-elliptic residual {translation:.3g}")
    return f"elliptic {elliptic:.3g}, non-elliptic {translation:.3g}"


def verify_norm_oracle(level: str, tol: float) -> str:
    target = math.sqrt(math.pi / 2)
    e1 = fn_monomial(1)
    dps = space_dps_norm(e1, 2, 1, tol).value
    radii, angles = ((0.0, 0.5, 0.9), 8) if level == 'smoke' else (SUP_RADII, SUP_ANGLES)
    mads = space_mads_seminorm(e1, space_preset('bmoa'), tol=tol, radii=radii, angles=angles).value
    _verify_assert(abs(dps / target - 1) < 1e-3, f"dps {dps!r}")
    _verify_assert(abs(mads / target - 1) < 5e-3, f"mads {mads!r}")
    return f"dps {dps:.8g}, mads {mads:.8g}"


def verify_norm_equivalence(level: str, tol: float) -> str:
    radii, angles = (0.0, 0.5, 0.75, 0.9, 0.95), 8
    worst_ratio, worst_shift = 1.0, 0.0
    for triple in ((2, 1, 0), (2, 1, 0.25), (3, 1.5, 0)):
        params = space_params(*triple)
        for name in NORM_CATALOGUE:
            f = fn_catalogue_get(name)
            values = {}
            for form in MADS_FORMS:
                values[form] = space_mads_seminorm(f, params, form, tol=tol, radii=radii, angles=angles).value
            refined = space_mads_seminorm(f, params, 'box', tol=tol / 10, radii=radii, angles=2 * angles).value
            for form in ('invariant', 'kernel'):
                ratio = values[form] / values['box']
                _verify_assert(1 / 50 <= ratio <= 50, f"{form}/box = {ratio:.3g} for {name} at {triple}")
                worst_ratio = max(worst_ratio, ratio, 1 / ratio)
            shift = abs(refined / values['box'] - 1)
            _verify_assert(shift < 0.1, f"refinement shift {shift:.3g} for {name} at {triple}")
            worst_shift = max(worst_shift, shift)
    return f"worst ratio {worst_ratio:.3g}, worst shift {worst_shift:.3g}"


def verify_plateau(level: str, tol: float) -> str:
    values = []
    for modulus in (0.9, 0.99, 0.999):
        f = fn_log_test(modulus)
        radii = (0.0, 0.5, 0.9, 0.99, 0.999)
        values.append(space_mads_seminorm(f, space_preset('bmoa'), tol=tol, radii=radii, angles=8).value)
    spread = max(values) / min(values) - 1
    _verify_assert(spread < 0.2, f"spread {spread:.3g} over {values}")
    return f"norms {', '.join(f'{v:.5g}' for v in values)}"


def verify_bloch_classifier(level: str, tol: float) -> str:
    for name in ('neg_z', 'rot_z'):
        for log_weighted in (False, True):
            verdict = semigroup_bloch_verdict(semigroup_bloch_condition_profile(semigroup_generator(name), log_weighted))
            _verify_assert(verdict == 'holds', f"{name} (log={log_weighted}) gave {verdict}")
    profile = semigroup_bloch_condition_profile(semigroup_generator('parabolic'))
    verdict = semigroup_bloch_verdict(profile)
    _verify_assert(verdict == 'fails', f"parabolic gave {verdict}")
    values = dict(zip(profile.radii, profile.values))
    for r in (0.9, 0.99):
        expected = (1 + r) / (1 - r)
        _verify_assert(abs(values[r] / expected - 1) < 0.01, f"r = {r}: {values[r]!r} vs {expected!r}")
    return f"parabolic slope {profile.slope:.3g}"


def verify_continuity(level: str, tol: float) -> str:
    times = np.logspace(-3, -1, 5)
    params = space_preset('bmoa')
    decaying = operator_strong_continuity_curve(semigroup_generator('neg_z'), fn_monomial(2), params, times,
                                                tol=tol, radii=SUP_RADII, angles=8)
    _verify_assert(decaying.slope <= -0.5, f"e2 under -z: slope {decaying.slope:.3g}")
    stuck = operator_strong_continuity_curve(semigroup_generator('rot_z'), fn_log_pole(), params, times,
                                             tol=tol, angles=4)
    reference = stuck.norms[-1]
    low = min(stuck.norms) / reference
    _verify_assert(low >= 0.5, f"log pole under iz drops to {low:.3g} of its t = 0.1 value")
    return f"decay slope {decaying.slope:.3g}, Sarason floor {low:.3g}"


def verify_volterra(level: str, tol: float) -> str:
    g = fn_from_taylor([1, 2, 3])
    one = operator_volterra_apply(g, fn_constant(1))
    coefficients = np.asarray(one.coefficients)
    _verify_assert(np.array_equal(coefficients[:3], [0, 2, 3]) and not np.any(coefficients[3:]), "T_g 1 != g - g(0)")
    g, f1, f2 = fn_log_test(0.5), fn_log_test(0.3j), fn_power_test(0.4, 0.5, 0.5)
    T = operator_volterra_apply(g, f1)
    z = _verify_points(20, 0.8, 5)
    h = 1e-5
    numeric = (T.value(z + h) - T.value(z - h)) / (2 * h)
    exact = f1.value(z) * g.derivative(z)
    derivative = float(np.max(np.abs(numeric - exact) / np.abs(exact)))
    combined = operator_volterra_apply(g, fn_combine([(2, f1), (-3j, f2)]))
    separate = 2 * T.value(z) - 3j * operator_volterra_apply(g, f2).value(z)
    linearity = float(np.max(np.abs(combined.value(z) - separate)))
    _verify_assert(derivative < 1e-6, f"derivative identity {derivative:.3g}")
    _verify_assert(linearity < tol, f"linearity {linearity:.3g}")
    return f"derivative {derivative:.3g}, linearity {linearity:.3g}"


def verify_witness(level: str, tol: float) -> str:
    state = operator_witness_construct(fn_log_squared(), space_params(*WITNESS_ACCEPTANCE), n_max=3)
    last = state.margins[-1]
    _verify_assert(state.n == 3, f"stopped at round {state.n}")
    return f"box lower bound margin {last['box_lower']:.3g} (slack {last['slack']:g})"


ADMISSIBLE_TABLE = (
    ((2, 1, 0), True, 'proper_Malpha'),
    ((2, 1, 0.4), True, 'proper_Malpha'),
    ((2, 1, 0.5), False, 'collapsed_to_Dps'),
    ((2, 0.5, 0), True, 'proper_Malpha'),
    ((2, 0, 0), False, 'collapsed_to_Dps'),
    ((1.5, 0, 0), True, 'proper_Malpha'),
    ((1.5, -0.2, 0), False, 'invalid'),
    ((3, 1.5, 0.1), True, 'proper_Malpha'),
    ((3, 1.5, 0.2), False, 'collapsed_to_Dps'),
    ((3, 0.5, 0), False, 'invalid'),
)


def verify_admissibility(level: str, tol: float) -> str:
    for triple, admissible, classification in ADMISSIBLE_TABLE:
        report = space_admissible_check(space_params(*triple))
        _verify_assert(space_is_admissible(*triple) == admissible and report.admissible == admissible,
                       f"{triple}: admissible {report.admissible}")
        _verify_assert(report.classification == classification, f"{triple}: {report.classification}")
    return f"{len(ADMISSIBLE_TABLE)} triples"


VERIFY_CHECKS = (
    VerifyCheck('1', 'mobius', ('smoke', 'full'), verify_mobius),
    VerifyCheck('2', 'flow', ('smoke', 'full'), verify_flow),
    VerifyCheck('3', 'koenigs', ('smoke', 'full'), verify_koenigs),
    VerifyCheck('4', 'norm-oracle', ('smoke', 'full'), verify_norm_oracle),
    VerifyCheck('5', 'norm-equivalence', ('full',), verify_norm_equivalence),
    VerifyCheck('6', 'test-function-plateau', ('full',), verify_plateau),
    VerifyCheck('7', 'bloch-classifier', ('smoke', 'full'), verify_bloch_classifier),
    VerifyCheck('8', 'continuity', ('full',), verify_continuity),
    VerifyCheck('9', 'volterra', ('smoke', 'full'), verify_volterra),
    VerifyCheck('10', 'witness', ('full',), verify_witness),
    VerifyCheck('11', 'admissibility', ('smoke', 'full'), verify_admissibility),
)


def verify_suite(level: str = 'smoke', tol: float = QUADRATURE_TOL,
                 on_result: Optional[Callable[[VerifyResult], None]] = None) -> Dict[str, Any]:
    """Run the checks tagged for a level; failures are recorded, never raised."""
    if level not in VERIFY_LEVELS:
        raise ValueError(f"Unknown verify level: {level!r}")
    results = []
    for check in VERIFY_CHECKS:
        if level not in check.levels:
            continue
        start = time.perf_counter()
        try:
            detail = check.run(level, tol)
            ok = True
        except (AssertionError, ValueError, ArithmeticError) as e:
            detail = _lab_status(e)
            ok = False
        result = VerifyResult(check.tag, check.name, ok, time.perf_counter() - start, detail)
        results.append(result)
        if on_result is not None:
            on_result(result)
    return {
        'level': level,
        'tol': tol,
        'passed': all(r.ok for r in results),
        'checks': [r._asdict() for r in results],
        'versions': lab_versions(),
    }


### CLI ###

def _command_warning(message: str):
    print(f"Warning: {message}", file=sys.stderr)


def _command_row_label(pipeline: str, row: Dict[str, Any]) -> str:
    if pipeline == 'norm':
        return f"{row['function']} [{row['form']}]"
    if pipeline == 'flow':
        return f"{row['generator']} z={row['z_re']:g}{row['z_im']:+g}j t={row['t']:g}"
    if pipeline == 'continuity':
        return f"{row['generator']} {row['function']} t={row['t']:g}"
    if pipeline == 'bloch-check':
        return f"{row['generator']} r={row['r']:g}" if row['r'] != '' else row['generator']
    if pipeline == 'symbol-class':
        return row['function']
    return f"round {row['round']}"


def _command_row_result(pipeline: str, row: Dict[str, Any]) -> str:
    if pipeline == 'norm':
        return f"{row['value']:.10g}"
    if pipeline == 'flow':
        return f"{row['value_re']:.10g}{row['value_im']:+.10g}j ({row['steps']} steps)"
    if pipeline == 'continuity':
        return f"{row['norm']:.6g}"
    if pipeline == 'bloch-check':
        return f"{row['value']:.6g} ({row['verdict']})"
    if pipeline == 'symbol-class':
        return f"bounded {row['bounded_flag']}, compact {row['compact_flag']} ({row['rule']})"
    return f"a = {row['coefficient']:.6g}, |I| = {row['arc_length']:.3g}, norm {row['partial_norm']:.6g}"


def command_scenario(pipeline: str, config: str, out: Optional[str] = None, tol: Optional[float] = None):
    """
    Run a scenario config through its pipeline and print one line per row.

    Args:
        pipeline: Verb used on the command line; must match the config
        config: Path to the scenario JSON
        out: Output directory override
        tol: Tolerance override
    """
    try:
        scenario = lab_load_scenario(config)
    except ConfigError as e:
        field = f" (field {e.field})" if e.field else ''
        print(f"Error: {e}{field}", file=sys.stderr)
        sys.exit(1)
    if scenario.pipeline != pipeline:
        print(f"Error: Config {config} is a {scenario.pipeline} scenario, not {pipeline}", file=sys.stderr)
        sys.exit(1)

    try:
        csv_path, json_path, metadata = lab_run_scenario(scenario, lab_get_output_directory(out), tol,
                                                         on_warning=_command_warning)
    except (ValueError, OSError) as e:
        print(f"Error: {e}", file=sys.stderr)
        sys.exit(1)

    with open(csv_path, 'r', encoding='utf-8', newline='') as handle:
        rows = list(csv.DictReader(handle))
    for row in rows:
        status = row['status']
        typed = {key: _command_parse_cell(value) for key, value in row.items()}
        if status == 'ok':
            print(f"✓ {_command_row_label(pipeline, typed)}: {_command_row_result(pipeline, typed)}")
        elif status == 'excluded':
            print(f"- {_command_row_label(pipeline, typed)}: excluded")
        elif pipeline == 'witness':
            print(f"✗ round {row['round']}: {status}")
        else:
            print(f"✗ {_command_row_label(pipeline, typed)}: {status}")

    summary = metadata['summary']
    if pipeline == 'bloch-check':
        print(f"Verdict: {summary.get('verdict', 'error')}")
    elif pipeline == 'continuity':
        for label, slope in summary.get('slopes', {}).items():
            print(f"Slope against 1/t for {label}: {slope}")
    elif pipeline == 'witness' and 'exhausted' in summary:
        print(f"Search exhausted after round {summary['witness']['n']}; tightest margins: "
              f"{json.dumps(summary['exhausted'])}", file=sys.stderr)

    plot_paths = []
    for kind in PLOT_KINDS:
        if any(item['kind'] == kind for item in metadata['series']):
            plot_paths.extend(lab_emit_plotdata(json_path, kind))
    print(f"Wrote {csv_path}")
    print(f"Wrote {json_path}")
    for path in plot_paths:
        print(f"Wrote {path}")
    if metadata['failed_rows']:
        print(f"{metadata['failed_rows']} of {metadata['rows']} rows failed", file=sys.stderr)


def _command_parse_cell(value: str):
    if value == '':
        return value
    try:
        return int(value)
    except ValueError:
        pass
    try:
        return float(value)
    except ValueError:
        return value


def command_verify(level: str = 'smoke', out: Optional[str] = None, tol: Optional[float] = None):
    """
    Run the acceptance checks for a level and write verify-<level>.json.

    Exits with status 1 when any check fails.
    """
    def report(result: VerifyResult):
        if result.ok:
            print(f"✓ {result.tag} {result.name} ({result.seconds:.1f}s)")
        else:
            print(f"✗ {result.tag} {result.name}: {result.detail}")

    if tol is not None and not tol > 0:
        print(f"Error: Tolerance must be positive, got {tol!r}", file=sys.stderr)
        sys.exit(1)
    summary = verify_suite(level, QUADRATURE_TOL if tol is None else tol, on_result=report)
    out_dir = lab_get_output_directory(out)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        summary_path = out_dir / f'verify-{level}.json'
        with open(summary_path, 'w', encoding='utf-8') as handle:
            json.dump(summary, handle, indent=2, ensure_ascii=False)
    except OSError as e:
        print(f"Error: Failed to write verify summary: {e}", file=sys.stderr)
        sys.exit(1)

    failed = [check for check in summary['checks'] if not check['ok']]
    total = len(summary['checks'])
    if failed:
        print(f"✗ {len(failed)} of {total} checks failed ({level})")
    else:
        print(f"✓ All {total} checks passed ({level})")
    print(f"Wrote {summary_path}")
    if failed:
        sys.exit(1)


def main():
    parser = argparse.ArgumentParser(description='disklab - Möbius invariant spaces, semigroups and operators on the disk')
    parser.add_argument('--version', action='version', version=f'disklab {__version__}')
    subparsers = parser.add_subparsers(dest='command', help='Commands')

    helps = {
        'norm': 'Estimate M_alpha(D^p_s), D^p_s, F(p, q, s) or weighted Bloch norms',
        'flow': 'Integrate a semigroup flow at points and times',
        'continuity': 'Norm of f o phi_t - f as t goes to 0',
        'bloch-check': 'Vanishing (log) Bloch condition on 1/G',
        'symbol-class': 'Boundedness and compactness evidence for T_g',
        'witness': 'Construct the witness function for a non-closed range',
    }
    for pipeline in PIPELINES:
        pipeline_parser = subparsers.add_parser(pipeline, help=helps[pipeline])
        pipeline_parser.add_argument('--config', required=True, help='Path to the scenario JSON')
        pipeline_parser.add_argument('--out', help='Output directory (default: $DISKLAB_OUTPUT or ./disklab-out)')
        pipeline_parser.add_argument('--tol', type=float, help='Override the scenario tolerance')

    # Verify command
    verify_parser = subparsers.add_parser('verify', help='Run the acceptance checks')
    verify_parser.add_argument('--level', choices=list(VERIFY_LEVELS), default='smoke',
                               help='smoke runs the fast subset, full runs every check')
    verify_parser.add_argument('--out', help='Output directory for verify-<level>.json')
    verify_parser.add_argument('--tol', type=float, help='Quadrature tolerance for the norm checks')

    args = parser.parse_args()

    if args.command in PIPELINES:
        command_scenario(args.command, args.config, out=args.out, tol=args.tol)
    elif args.command == 'verify':
        command_verify(args.level, out=args.out, tol=args.tol)
    else:
        parser.print_help()


if __name__ == '__main__':
    main()
