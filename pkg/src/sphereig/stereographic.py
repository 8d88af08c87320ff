"""Stereographic chart of S^N and the radial test functions built on it.

The sphere is projected from the South Pole onto the equatorial plane, so
the open upper hemisphere maps into the open unit ball of the chart.  With
s = |x| the azimuthal angle is theta = 2*arctan(s), the conformal factor is
p(s) = 2/(1+s^2), and the round volume element is p(s)^N dx.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from sphereig.errors import InputError

__all__ = [
    "ChartPoint",
    "SphereVolume",
    "TestFunctionSet",
    "cap_volume",
    "chart_point",
    "conformal_factor",
    "equivalent_radius",
    "gradient_identity_check",
    "s_from_theta",
    "sphere_to_chart",
    "chart_to_sphere",
    "test_function_values",
    "theta_from_s",
    "unit_ball_volume",
]


def theta_from_s(s):
    """Azimuthal angle of a chart point at distance s from the origin."""
    return 2.0 * np.arctan(s)


def s_from_theta(theta):
    """Chart distance of a sphere point at azimuthal angle theta < pi."""
    return np.tan(np.asarray(theta) / 2.0)


def conformal_factor(s):
    """p(s) = 2/(1+s^2); satisfies sin(theta) = p(s)*s."""
    s = np.asarray(s, dtype=float)
    return 2.0 / (1.0 + s * s)


def unit_ball_volume(dim):
    """Volume of the unit ball in R^dim, via log-gamma for stability."""
    return math.exp(0.5 * dim * math.log(math.pi) - math.lgamma(0.5 * dim + 1.0))


@dataclass(frozen=True)
class SphereVolume:
    """An N-volume on S^N together with the ambient dimension."""

    dim: int
    value: float

    @property
    def unit_ball(self):
        return unit_ball_volume(self.dim)


@dataclass(frozen=True)
class ChartPoint:
    """A point of the chart with its derived radial quantities."""

    coords: tuple
    s: float
    theta: float


def chart_point(coords):
    coords = tuple(float(c) for c in coords)
    s = math.sqrt(sum(c * c for c in coords))
    return ChartPoint(coords=coords, s=s, theta=2.0 * math.atan(s))


def chart_to_sphere(xy):
    """Map chart coordinates (n, d) to points of S^d in R^{d+1}.

    Inverse stereographic projection from the South Pole: the last ambient
    coordinate is cos(theta) and equals +1 at the chart origin.
    """
    xy = np.atleast_2d(np.asarray(xy, dtype=float))
    s2 = np.sum(xy * xy, axis=1)
    denom = 1.0 + s2
    out = np.empty((xy.shape[0], xy.shape[1] + 1))
    out[:, :-1] = 2.0 * xy / denom[:, None]
    out[:, -1] = (1.0 - s2) / denom
    return out


def sphere_to_chart(pts):
    """Project points of S^d in R^{d+1} from the South Pole onto the chart."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    return pts[:, :-1] / (1.0 + pts[:, -1])[:, None]


def cap_volume(dim, gamma):
    """N-volume of a geodesic cap of radius gamma: N*omega_N*int_0^gamma sin^{N-1}."""
    if not 0.0 < gamma <= math.pi / 2.0 + 1e-12:
        raise InputError(f"cap radius must lie in (0, pi/2], got {gamma}")
    val, err = quad(lambda t: math.sin(t) ** (dim - 1), 0.0, gamma,
                    epsabs=1e-14, epsrel=1e-13, limit=200)
    if err > 1e-10:
        raise InputError(f"cap volume quadrature unreliable (err={err:.2e})")
    return SphereVolume(dim=dim, value=dim * unit_ball_volume(dim) * val)


def equivalent_radius(dim, volume):
    """Radius gamma of the geodesic cap with the given N-volume."""
    value = volume.value if isinstance(volume, SphereVolume) else float(volume)
    vmax = cap_volume(dim, math.pi / 2.0).value
    if not 0.0 < value <= vmax * (1.0 + 1e-12):
        raise InputError(
            f"volume {value} outside (0, {vmax}] admissible for a hemisphere")
    if value >= vmax:
        return math.pi / 2.0
    f = lambda g: cap_volume(dim, g).value - value
    return brentq(f, 1e-14, math.pi / 2.0, xtol=1e-14, rtol=8.9e-16)


@dataclass(frozen=True)
class TestFunctionSet:
    """The N radial test functions Phi_i(x) = G(theta) * x_i / s.

    ``profile`` is an extended cap eigenfunction providing G and G'.  At the
    chart origin every Phi_i is 0 by continuity (G(theta) ~ theta ~ 2s).
    """

    __test__ = False            # not a pytest class despite the name

    profile: object
    dim: int


def test_function_values(tf, point):
    """Evaluate (Phi_1, ..., Phi_N) at a chart point."""
    coords = np.asarray(point.coords, dtype=float)
    if point.s == 0.0:
        return np.zeros(len(coords))
    g = tf.profile.value(point.theta)
    return g * coords / point.s


test_function_values.__test__ = False       # not a pytest item despite the name


def gradient_identity_check(tf, point, h=1e-3):
    """Deviation of the finite-difference gradient sum from its radial form.

    Computes sum_i |p^{-1} grad Phi_i|^2 by central differences with step h
    in each chart coordinate and returns the absolute deviation from
    G'(theta)^2 + (N-1) G(theta)^2 / sin^2(theta).
    """
    coords = np.asarray(point.coords, dtype=float)
    n = coords.size
    if point.s < 10.0 * h:
        raise InputError("check point too close to the chart origin")
    if abs(point.theta - tf.profile.gamma) < 10.0 * h:
        raise InputError("check point too close to the profile kink at gamma")

    grad_sq = 0.0
    for j in range(n):
        step = np.zeros(n)
        step[j] = h
        fp = test_function_values(tf, chart_point(coords + step))
        fm = test_function_values(tf, chart_point(coords - step))
        d = (fp - fm) / (2.0 * h)
        grad_sq += float(np.dot(d, d))
    p = float(conformal_factor(point.s))
    lhs = grad_sq / (p * p)

    g = tf.profile.value(point.theta)
    gp = tf.profile.deriv(point.theta)
    sin_t = math.sin(point.theta)
    rhs = gp * gp + (tf.dim - 1) * g * g / (sin_t * sin_t)
    return abs(lhs - rhs)
