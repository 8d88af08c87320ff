"""Radial Neumann eigenproblems of geodesic caps on S^N.

Separation of variables on a polar cap of radius gamma reduces the Neumann
Laplace-Beltrami problem to a family of singular Sturm-Liouville problems
on (0, gamma), one per angular index l:

    -y'' - (N-1) cot(theta) y' + l(l+N-2)/sin^2(theta) y = mu y,
    y regular at 0,  y'(gamma) = 0.

Eigenvalues are located by shooting: solutions start at theta0 = 0.05 from
an 8-term Frobenius series y = theta^l (1 + c2 theta^2 + ...), march to
gamma with a fixed-substep RK4 kernel (numba), and the Neumann miss
function y'(gamma; mu) is driven to zero by bisection plus a secant polish.
Starting outside the singular layer matters: steps comparable to theta
there cost ~(h/theta)^4 relative accuracy per step.
"""

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from numba import njit
from scipy.interpolate import CubicHermiteSpline

from sphereig.errors import BracketError, InputError, SolverError

__all__ = [
    "CapProblem",
    "RadialEigenpair",
    "ExtendedProfile",
    "LemmaReport",
    "Mu1Cap",
    "solve_mode",
    "mu1_cap",
    "frobenius_coefficient",
    "frobenius_series",
    "extend_profile",
    "check_lemma",
    "rayleigh_quotient_radial",
    "ode_residual",
]

GRID_POINTS = 2048          # fixed output grid for downstream quadrature
THETA_START = 0.05          # shooting start; the 8-term series below is ~1e-15
SERIES_TERMS = 8
_SEARCH_STEPS = 1024        # RK4 steps for bracketing integrations
_POLISH_STEPS = 4096        # RK4 steps for the secant polish
_PROFILE_SUBSTEPS = 4       # RK4 substeps per output-grid interval
CAP_FRACTION = 0.02         # step ceiling as a fraction of local theta


def _cot_csc2_coeffs(n=SERIES_TERMS + 2):
    """Laurent coefficients: cot t = sum c_k t^{2k-1}, csc^2 t = sum e_k t^{2k-2}.

    Obtained by dividing the even series cos t by sin(t)/t; differentiation
    gives e_k = -(2k-1) c_k.
    """
    cos_c = [(-1.0) ** m / math.factorial(2 * m) for m in range(n)]
    sinc_c = [(-1.0) ** m / math.factorial(2 * m + 1) for m in range(n)]
    cot = []
    for k in range(n):
        acc = cos_c[k]
        for j in range(k):
            acc -= cot[j] * sinc_c[k - j]
        cot.append(acc)
    csc2 = [1.0] + [-(2 * k - 1) * cot[k] for k in range(1, n)]
    return tuple(cot), tuple(csc2)


_COT, _CSC2 = _cot_csc2_coeffs()


@dataclass(frozen=True)
class CapProblem:
    """One radial eigenproblem: ambient dimension, cap radius, angular index."""

    dim: int
    gamma: float
    mode_l: int = 0

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 2:
            raise InputError(f"dim must be an integer >= 2, got {self.dim}")
        if not 0.0 < self.gamma <= math.pi / 2.0 + 1e-12:
            raise InputError(f"gamma must lie in (0, pi/2], got {self.gamma}")
        if int(self.mode_l) != self.mode_l or self.mode_l < 0:
            raise InputError(f"mode_l must be a non-negative integer, got {self.mode_l}")

    @property
    def potential_coeff(self):
        return self.mode_l * (self.mode_l + self.dim - 2)


@dataclass
class RadialEigenpair:
    """One solved mode: eigenvalue, radial index and sampled profile."""

    mu: float
    k: int
    theta_grid: np.ndarray
    y_values: np.ndarray
    y_prime_values: np.ndarray
    dim: int = 2
    mode_l: int = 0
    gamma: float = 0.0
    series: tuple = ()          # leading Frobenius coefficients (a0=1, a1, ...)

    def hermite(self):
        """C^1 interpolant of the profile on [0, gamma]."""
        return CubicHermiteSpline(self.theta_grid, self.y_values, self.y_prime_values)

    def hermite_deriv(self):
        """C^1 interpolant of y' (uses y'' from the ODE at the nodes)."""
        ypp = _ode_ypp(self.dim, self.potential_coeff, self.mu,
                       self.theta_grid, self.y_values, self.y_prime_values,
                       self.mode_l, self.series)
        return CubicHermiteSpline(self.theta_grid, self.y_prime_values, ypp)

    @property
    def potential_coeff(self):
        return self.mode_l * (self.mode_l + self.dim - 2)


@dataclass
class LemmaReport:
    """Barrier and monotonicity data for the extended profile."""

    frobenius_a: float
    max_W: float
    ratio_monotone: bool
    strict: bool
    max_ratio_diff: float = 0.0


@dataclass
class Mu1Cap:
    """First non-trivial cap eigenvalue with its attaining mode."""

    value: float
    attained_by_l1: bool
    mu_11: float
    mu_02: float
    warning: str | None = None


def frobenius_series(dim, l, mu, terms=SERIES_TERMS):
    """Coefficients a_m of the regular solution y = theta^l sum a_m theta^{2m}.

    Substituting the cot/csc^2 series into the radial equation gives the
    recurrence  a_m * 2m(2l+2m+N-2) =
        -mu a_{m-1} + sum_{k=1..m} [q e_k - (N-1) c_k (l+2(m-k))] a_{m-k},
    with q = l(l+N-2) and a_0 = 1.
    """
    q = l * (l + dim - 2)
    a = [1.0]
    for m in range(1, terms):
        s = -mu * a[m - 1]
        for k in range(1, m + 1):
            if k >= len(_COT):
                raise InputError(
                    f"series coefficients available up to {len(_COT) - 1} correction terms")
            s += (q * _CSC2[k] - (dim - 1) * _COT[k] * (l + 2 * (m - k))) * a[m - k]
        a.append(s / (2.0 * m * (2.0 * l + 2.0 * m + dim - 2.0)))
    return tuple(a)


def _series_value(l, coeffs, theta):
    th = np.asarray(theta, dtype=float)
    acc = np.zeros_like(th)
    for m, a in enumerate(coeffs):
        acc = acc + a * th ** (2 * m)
    return th ** l * acc


def _series_deriv(l, coeffs, theta):
    th = np.asarray(theta, dtype=float)
    acc = np.zeros_like(th)
    for m, a in enumerate(coeffs):
        power = l + 2 * m - 1
        if power < 0:
            continue            # only the constant l=0 leading term
        acc = acc + (l + 2 * m) * a * th ** power
    return acc


@njit(cache=True)
def _rhs(nm1, q, mu, th, y, yp):
    st = math.sin(th)
    return -nm1 * math.cos(th) / st * yp + (q / (st * st) - mu) * y


@njit(cache=True)
def _march(nm1, q, mu, th0, y0, yp0, nodes, nsub):
    """RK4 march of (y, y') from th0 through every node of ``nodes``.

    The base step per interval is span/nsub, but steps are additionally
    capped at a fraction of the local theta: the singular coefficients blow
    up like 1/theta at the left end and uniform steps there dominate the
    global error.  The cap adds only ~O(log(1/theta0)) geometric steps.
    """
    ny = nodes.size
    ys = np.empty(ny)
    yps = np.empty(ny)
    th, y, yp = th0, y0, yp0
    for i in range(ny):
        target = nodes[i]
        span = target - th
        if span > 0.0:
            base = span / nsub
            while th < target:
                hstep = target - th
                if hstep > base:
                    hstep = base
                cap = CAP_FRACTION * th
                if hstep > cap:
                    hstep = cap
                k1y = yp
                k1p = _rhs(nm1, q, mu, th, y, yp)
                k2y = yp + 0.5 * hstep * k1p
                k2p = _rhs(nm1, q, mu, th + 0.5 * hstep, y + 0.5 * hstep * k1y,
                           yp + 0.5 * hstep * k1p)
                k3y = yp + 0.5 * hstep * k2p
                k3p = _rhs(nm1, q, mu, th + 0.5 * hstep, y + 0.5 * hstep * k2y,
                           yp + 0.5 * hstep * k2p)
                k4y = yp + hstep * k3p
                k4p = _rhs(nm1, q, mu, th + hstep, y + hstep * k3y,
                           yp + hstep * k3p)
                y += hstep / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y)
                yp += hstep / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
                new_th = th + hstep
                if new_th <= th:         # float underflow guard at the target
                    break
                th = new_th
        th = target
        ys[i] = y
        yps[i] = yp
    return ys, yps


def _start_values(dim, l, mu, theta0):
    """Series start at theta0, rescaled by theta0^{-l} to keep floats tame."""
    coeffs = frobenius_series(dim, l, mu)
    bracket = sum(a * theta0 ** (2 * m) for m, a in enumerate(coeffs))
    bracket_d = sum(2 * m * a * theta0 ** (2 * m - 1) for m, a in enumerate(coeffs) if m > 0)
    y0 = bracket
    yp0 = l / theta0 * bracket + bracket_d
    return y0, yp0, coeffs


def _miss(dim, q, mu, l, theta0, gamma, nsteps):
    y0, yp0, _ = _start_values(dim, l, mu, theta0)
    nodes = np.array([gamma])
    _, yps = _march(float(dim - 1), float(q), float(mu), theta0, y0, yp0, nodes, nsteps)
    return yps[0]


def _refine_root(dim, q, l, theta0, gamma, lo, hi, f_lo, f_hi):
    """Bisection to 1e-6, secant polish with finer substeps to ~1e-13."""
    for _ in range(60):
        if hi - lo < 1e-6:
            break
        mid = 0.5 * (lo + hi)
        f_mid = _miss(dim, q, mid, l, theta0, gamma, _SEARCH_STEPS)
        if f_lo * f_mid <= 0.0:
            hi, f_hi = mid, f_mid
        else:
            lo, f_lo = mid, f_mid
    a, b = lo, hi
    fa = _miss(dim, q, a, l, theta0, gamma, _POLISH_STEPS)
    fb = _miss(dim, q, b, l, theta0, gamma, _POLISH_STEPS)
    for _ in range(60):
        if fb == fa:
            break
        c = b - fb * (b - a) / (fb - fa)
        c = min(max(c, lo - 1e-3), hi + 1e-3)
        a, fa = b, fb
        b, fb = c, _miss(dim, q, c, l, theta0, gamma, _POLISH_STEPS)
        if abs(b - a) < 1e-13 * max(1.0, abs(b)):
            return b
    if abs(b - a) < 1e-10 * max(1.0, abs(b)):
        return b
    raise BracketError(
        f"secant polish stalled for (dim={dim}, gamma={gamma}, l={l}) near mu={b}")


def _find_roots(dim, gamma, l, k_max):
    """Scan the miss function for sign changes, refine each root."""
    q = l * (l + dim - 2)
    theta0 = min(THETA_START, gamma / 8.0)
    roots = []
    mu = 0.25
    f_prev = _miss(dim, q, mu, l, theta0, gamma, _SEARCH_STEPS)
    guard = 0
    while len(roots) < k_max:
        guard += 1
        if guard > 100000 or mu > 1e6:
            raise BracketError(
                f"failed to bracket {k_max} eigenvalues for (dim={dim}, "
                f"gamma={gamma}, l={l}); reached mu={mu}")
        step = max(0.5, 0.05 * mu)
        mu_next = mu + step
        f_next = _miss(dim, q, mu_next, l, theta0, gamma, _SEARCH_STEPS)
        if f_prev == 0.0:
            roots.append(mu)
        elif f_prev * f_next < 0.0:
            roots.append(_refine_root(dim, q, l, theta0, gamma, mu, mu_next,
                                      f_prev, f_next))
        mu, f_prev = mu_next, f_next
    return roots[:k_max], theta0


def _profile_on_grid(dim, l, mu, gamma, theta0):
    """March the fixed output grid; nodes below theta0 come from the series."""
    grid = np.linspace(0.0, gamma, GRID_POINTS)
    y0, yp0, coeffs = _start_values(dim, l, mu, theta0)
    q = l * (l + dim - 2)
    n_series = int(np.searchsorted(grid, theta0, side="right"))
    nodes = grid[n_series:].copy()
    ys, yps = _march(float(dim - 1), float(q), float(mu), theta0, y0, yp0,
                     nodes, _PROFILE_SUBSTEPS)
    # restore the theta0^l scale so the leading Frobenius coefficient is 1
    scale = theta0 ** l
    y = np.empty(GRID_POINTS)
    yp = np.empty(GRID_POINTS)
    y[n_series:] = ys * scale
    yp[n_series:] = yps * scale
    y[:n_series] = _series_value(l, coeffs, grid[:n_series])
    yp[:n_series] = _series_deriv(l, coeffs, grid[:n_series])
    return grid, y, yp, coeffs


def _ode_ypp(dim, q, mu, theta, y, yp, l, series):
    """y'' from the ODE itself; the series limit is used at theta = 0."""
    theta = np.asarray(theta, dtype=float)
    out = np.empty_like(theta)
    pos = theta > 0.0
    st = np.sin(theta[pos])
    out[pos] = (-(dim - 1) * np.cos(theta[pos]) / st * yp[pos]
                + (q / (st * st) - mu) * y[pos])
    if np.any(~pos):
        # theta^l series: y''(0) = 0 for l != 2, = 2*a0 for l = 2
        out[~pos] = 2.0 * series[0] if l == 2 else 0.0
    return out


@lru_cache(maxsize=512)
def _solve_mode_cached(dim, gamma, l, k_max):
    pairs = []
    if l == 0:
        grid = np.linspace(0.0, gamma, GRID_POINTS)
        pairs.append(RadialEigenpair(
            mu=0.0, k=1, theta_grid=grid, y_values=np.ones(GRID_POINTS),
            y_prime_values=np.zeros(GRID_POINTS), dim=dim, mode_l=0,
            gamma=gamma, series=(1.0,)))
        if k_max == 1:
            return tuple(pairs)
        n_roots = k_max - 1
    else:
        n_roots = k_max
    roots, theta0 = _find_roots(dim, gamma, l, n_roots)
    k0 = len(pairs) + 1
    for j, mu in enumerate(roots):
        grid, y, yp, coeffs = _profile_on_grid(dim, l, mu, gamma, theta0)
        pairs.append(RadialEigenpair(
            mu=mu, k=k0 + j, theta_grid=grid, y_values=y, y_prime_values=yp,
            dim=dim, mode_l=l, gamma=gamma, series=coeffs))
    mus = [p.mu for p in pairs]
    if any(b - a <= 0.0 for a, b in zip(mus, mus[1:])):
        raise SolverError(f"eigenvalues not strictly increasing: {mus}")
    return tuple(pairs)


def solve_mode(problem, k_max):
    """First k_max eigenpairs of the radial problem, ordered by eigenvalue."""
    if k_max < 1:
        raise InputError("k_max must be >= 1")
    return list(_solve_mode_cached(problem.dim, float(problem.gamma),
                                   problem.mode_l, int(k_max)))


def mu1_cap(dim, gamma):
    """First non-trivial Neumann eigenvalue of the cap, min(mu_{0,2}, mu_{1,1})."""
    zonal = solve_mode(CapProblem(dim=dim, gamma=gamma, mode_l=0), 2)
    tilt = solve_mode(CapProblem(dim=dim, gamma=gamma, mode_l=1), 1)
    mu_02 = zonal[1].mu
    mu_11 = tilt[0].mu
    warning = None
    if abs(mu_02 - mu_11) < 1e-10:
        warning = f"mu_02 and mu_11 coincide within 1e-10 at gamma={gamma}"
        return Mu1Cap(value=mu_11, attained_by_l1=True, mu_11=mu_11,
                      mu_02=mu_02, warning=warning)
    attained = mu_11 < mu_02
    return Mu1Cap(value=min(mu_02, mu_11), attained_by_l1=attained,
                  mu_11=mu_11, mu_02=mu_02, warning=warning)


def frobenius_coefficient(mu1, dim):
    """Cubic coefficient a of the profile expansion theta - a theta^3 + o(theta^3).

    a = (mu1 - (2/3)(N-1)) / (2N+4), arranged over a common denominator so
    the hemisphere values come out bit-exact.
    """
    if dim < 2:
        raise InputError("dim must be >= 2")
    a = (3.0 * mu1 - 2.0 * (dim - 1)) / (3.0 * (2.0 * dim + 4.0))
    if mu1 > 2.0 / 3.0 * (dim - 1):
        assert a > 0.0
    return a


@dataclass
class ExtendedProfile:
    """Cap eigenfunction continued by its boundary value past gamma.

    G(theta) = g(theta) on [0, gamma] and G(theta) = g(gamma) beyond; the
    continuation is constant in theta, so G' vanishes there.  The ratio
    G/sin(theta) is evaluated through the Frobenius series below theta=1e-3,
    where the direct quotient starts losing digits.
    """

    gamma: float
    profile: RadialEigenpair
    plateau: float
    _spline: object = field(default=None, repr=False, compare=False)
    _spline_d: object = field(default=None, repr=False, compare=False)

    def _splines(self):
        if self._spline is None:
            self._spline = self.profile.hermite()
            self._spline_d = self.profile.hermite_deriv()
        return self._spline, self._spline_d

    def value(self, theta):
        sp, _ = self._splines()
        theta = np.asarray(theta, dtype=float)
        out = np.where(theta >= self.gamma, self.plateau,
                       sp(np.clip(theta, 0.0, self.gamma)))
        return out if out.ndim else float(out)

    def deriv(self, theta):
        _, spd = self._splines()
        theta = np.asarray(theta, dtype=float)
        out = np.where(theta >= self.gamma, 0.0,
                       spd(np.clip(theta, 0.0, self.gamma)))
        return out if out.ndim else float(out)

    def ratio(self, theta):
        """G(theta)/sin(theta) with its series limit 1 at theta = 0."""
        theta = np.asarray(theta, dtype=float)
        coeffs = self.profile.series
        small = theta < 1e-3
        safe = np.where(small, 1.0, theta)
        out = self.value(safe) / np.sin(safe)
        if np.any(small):
            th = theta[small] if theta.ndim else theta
            num = _series_value(1, coeffs, th)
            den = np.sin(th)
            ratio_small = np.where(th > 0.0, num / np.where(th > 0.0, den, 1.0), 1.0)
            if out.ndim:
                out[small] = ratio_small
            else:
                out = ratio_small
        return out if out.ndim else float(out)


def extend_profile(g, gamma):
    """Extend the (l=1, k=1) eigenfunction by its plateau value g(gamma)."""
    if g.mode_l != 1 or g.k != 1:
        raise InputError("extend_profile expects the (l=1, k=1) eigenpair")
    if abs(g.gamma - gamma) > 1e-12:
        raise InputError("gamma disagrees with the eigenpair's cap radius")
    dy = np.diff(g.y_values)
    if np.min(dy) < -1e-10 * np.max(np.abs(g.y_values)):
        raise SolverError("input profile is not non-decreasing; upstream solver failure")
    return ExtendedProfile(gamma=float(gamma), profile=g,
                           plateau=float(g.y_values[-1]))


def check_lemma(G, dim, mu1):
    """Evaluate the barrier W = G' - G cot(theta) and the ratio monotonicity.

    W is sampled on the profile grid over (0, gamma]; the difference
    quotients of G/sin(theta) are sampled on (0, pi/2].  Both checks start
    at theta = 1e-3 to stay clear of the 0/0 limit at the pole.
    """
    g = G.profile
    mask = g.theta_grid >= 1e-3
    th = g.theta_grid[mask]
    w = g.y_prime_values[mask] - g.y_values[mask] / np.tan(th)
    max_w = float(np.max(w)) if th.size else float("nan")

    ext = np.linspace(G.gamma, math.pi / 2.0, 512)[1:]
    thetas = np.concatenate([th, ext]) if ext.size else th
    ratios = np.concatenate([
        g.y_values[mask] / np.sin(th),
        G.plateau / np.sin(ext)]) if ext.size else g.y_values[mask] / np.sin(th)
    diffs = np.diff(ratios)
    scale = float(np.max(np.abs(ratios)))
    max_diff = float(np.max(diffs)) if diffs.size else 0.0
    monotone = max_diff <= 1e-12 * max(scale, 1.0)

    a = frobenius_coefficient(mu1, dim)
    strict = G.gamma < math.pi / 2.0 - 1e-12
    return LemmaReport(frobenius_a=a, max_W=max_w, ratio_monotone=bool(monotone),
                       strict=strict, max_ratio_diff=max_diff)


def _gl_nodes(n=5):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def _composite_quad(f, grid, n_gl=5):
    """Composite Gauss-Legendre over the intervals of ``grid``."""
    t, w = _gl_nodes(n_gl)
    lefts = grid[:-1]
    widths = np.diff(grid)
    pts = lefts[:, None] + widths[:, None] * t[None, :]
    vals = f(pts.ravel()).reshape(pts.shape)
    return float(np.sum(vals * w[None, :] * widths[:, None]))


def rayleigh_quotient_radial(g, dim, gamma):
    """Radial Rayleigh quotient of a positive cap profile.

    int [g'^2 + (N-1) g^2/sin^2] sin^{N-1} / int g^2 sin^{N-1} over (0, gamma);
    the angular factor cancels.  Near theta = 0 the integrand limit is
    g^2/sin^2 -> 1 for the normalized tilt mode, so the sin^{N-1} weight
    keeps the quadrature regular.
    """
    if np.min(g.y_values[1:]) <= 0.0:
        raise InputError("rayleigh_quotient_radial expects a positive profile")
    sp = g.hermite()
    spd = g.hermite_deriv()
    nm1 = dim - 1

    def numerator(th):
        st = np.sin(th)
        return (spd(th) ** 2 + nm1 * (sp(th) / st) ** 2) * st ** nm1

    def denominator(th):
        return sp(th) ** 2 * np.sin(th) ** nm1

    num = _composite_quad(numerator, g.theta_grid)
    den = _composite_quad(denominator, g.theta_grid)
    if not (math.isfinite(num) and math.isfinite(den)) or den <= 0.0:
        raise SolverError("radial quadrature failed near theta = 0")
    return num / den


def _fd_deriv_4(values, h):
    """Fourth-order central first derivative on a uniform grid (interior only)."""
    v = values
    d = (v[:-4] - 8.0 * v[1:-3] + 8.0 * v[3:-1] - v[4:]) / (12.0 * h)
    return d


def ode_residual(pair):
    """Max normalized ODE residual of a solved profile on interior grid nodes.

    Two independent consistency checks: d(y)/dtheta against the stored y',
    and d(y')/dtheta against the right-hand side of the radial equation,
    both via 4th-order central differences.
    """
    th = pair.theta_grid
    h = th[1] - th[0]
    q = pair.potential_coeff
    inner = slice(2, -2)

    dy = _fd_deriv_4(pair.y_values, h)
    r1 = dy - pair.y_prime_values[inner]

    dyp = _fd_deriv_4(pair.y_prime_values, h)
    rhs = _ode_ypp(pair.dim, q, pair.mu, th[inner], pair.y_values[inner],
                   pair.y_prime_values[inner], pair.mode_l, pair.series)
    r2 = dyp - rhs

    scale = max(1.0, float(np.max(np.abs(pair.y_values))),
                float(np.max(np.abs(rhs))))
    return max(float(np.max(np.abs(r1))), float(np.max(np.abs(r2)))) / scale
