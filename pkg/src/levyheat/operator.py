"""Application of the truncated operators L^{kappa, eps} to sampled fields.

Lattice fields are handled through Fourier multipliers assembled from a
ring quadrature of the jump density: with nodes z_q and weights w_q on
dyadic shells eps < |z| < R,

    L_eps e^{i xi x} = M(xi) e^{i xi x},
    M(xi) = sum_q w_q W(z_q) (e^{i xi z_q} - 1 [- i xi z_q 1_{|z_q|<1}]),

which is exactly the ring quadrature applied to the trigonometric
interpolant of the field. On the torus the jumps longer than the half
width wrap around; they are collected in an image kernel on [-L, L].
For eps = 0 the core |z| < z_core is added as a Taylor-moment series.
Callable fields are integrated pointwise with adaptive quadrature.
"""

from __future__ import annotations

import math
import warnings
from functools import lru_cache

import numpy as np
from scipy import integrate, special

from .frozen import GridError, SpaceTimeGrid
from .measure import DivergentIntegralError, LevyProfile, bound_rho, tail_mass
from .symbol import CoefficientField, _jratio

R_FAR = 1e4


def _weight_parts(coeff):
    """(base, mod, theta) for a coefficient, or (w, None, None) for an x-independent weight."""
    if isinstance(coeff, CoefficientField):
        return coeff.base, (None if coeff.is_constant else coeff.mod), coeff.theta_at
    return coeff, None, None


def _shells(lo: float, hi: float):
    """Dyadic shells [a, 2a] covering [lo, hi]."""
    out = []
    a = lo
    while a < hi * (1 - 1e-12):
        b = min(2 * a, hi)
        if hi - b < 0.25 * (b - a):
            b = hi
        out.append((a, b))
        a = b
    return out


def ring_rule(lo: float, hi: float, dx: float, extra: int = 12):
    """Gauss-Legendre radii and weights on dyadic shells of [lo, hi]; node count resolves pi/dx."""
    r, w = [], []
    for a, b in _shells(lo, hi):
        m = int(math.ceil(math.pi * (b - a) / (2 * dx))) + extra
        x, wx = np.polynomial.legendre.leggauss(m)
        r.append(0.5 * (a + b) + 0.5 * (b - a) * x)
        w.append(0.5 * (b - a) * wx)
    if not r:
        return np.zeros(0), np.zeros(0)
    return np.concatenate(r), np.concatenate(w)


def _signed_density(profile: LevyProfile, weight, z):
    return np.asarray(weight(z), dtype=float) * profile.J(z)


def _moments(profile: LevyProfile, weight, zc: float, kmax: int = 40, first: int = 1):
    """m_j = ∫_{|z|<zc} z^j W(z) dz for j = first..kmax."""
    out = np.zeros(kmax + 1)
    for j in range(first, kmax + 1):
        def f(v, j=j):
            r = math.exp(v)
            e = profile.lognu(v) + (j + 1) * v
            if e < -745:
                return 0.0
            if e > 700:
                raise DivergentIntegralError(f"moment of order {j} diverges at the origin")
            wp = float(weight(np.array(r))) * float(_jr(profile, r))
            wm = float(weight(np.array(-r))) * float(_jr(profile, -r))
            return math.exp(e) * (wp + (-1) ** j * wm)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            lz = math.log(zc)
            val = integrate.quad(f, -np.inf, lz - 30, limit=200)[0] + integrate.quad(f, lz - 30, lz, limit=200,
                                                                                  epsabs=0, epsrel=1e-13)[0]
        out[j] = val
    return out


def _jr(profile, z):
    return float(_jratio(profile, z))


def _core_multiplier(profile, weight, zc, xi, case):
    """∫_{|z|<zc} (e^{i xi z} - 1 - i xi z [P1, P3 symmetric]) W(z) dz as a Taylor series."""
    kmax = 40
    m = _moments(profile, weight, zc, kmax, first=2 if case == "P1" else 1)
    out = np.zeros(np.shape(xi), dtype=complex)
    term_pow = np.ones(np.shape(xi), dtype=complex)
    for j in range(1, kmax + 1):
        term_pow = term_pow * (1j * xi) / j
        if j == 1 and case in ("P1",):
            continue
        out += term_pow * m[j]
    return out


def _image_weights(profile, weight, L, u, terms=400):
    """W_img(u) = sum_{m != 0} W(u + 2 L m) on [-L, L] with a tail remainder."""
    m = np.arange(1, terms + 1, dtype=float)[:, None]
    s = (_signed_density(profile, weight, u[None, :] + 2 * L * m).sum(0)
         + _signed_density(profile, weight, u[None, :] - 2 * L * m).sum(0))
    far = (2 * terms + 1) * L
    if profile.upper_cut > far:
        wf = 0.5 * (abs(float(weight(np.array(far)))) + abs(float(weight(np.array(-far)))))
        s = s + wf * tail_mass(profile, far) / (2 * L)
    return s


@lru_cache(maxsize=32)
def _lattice_multiplier(profile: LevyProfile, weight, eps: float, L: float, n: int, case: str,
                        geometry: str):
    """Multiplier M(xi) on the rfft frequencies of the torus with half width L (d=1)."""
    dx = 2 * L / n
    xi = 2 * np.pi * np.fft.rfftfreq(n, dx)
    zc = min(0.5, 2 * dx)
    lo = eps if eps > 0 else zc
    reach = L if geometry == "torus" else L / 2           # padded box: jumps up to the data width
    M = np.zeros(xi.shape, dtype=complex)
    info = {"core": eps == 0.0, "z_core": zc if eps == 0 else None}
    if lo < reach:
        r, w = ring_rule(lo, reach, dx)
        z = np.concatenate([r, -r])
        ww = np.concatenate([w, w]) * _signed_density(profile, weight, z)
        info["ring_nodes"] = int(z.size)
        for chunk in np.array_split(np.arange(z.size), max(1, z.size // 512)):
            zq, wq = z[chunk], ww[chunk]
            ph = np.exp(1j * np.outer(xi, zq)) - 1.0
            if case == "P1":
                comp = np.where(np.abs(zq) < 1.0, zq, 0.0)
                ph = ph - 1j * np.outer(xi, comp)
            M += ph @ wq
    if geometry == "torus":
        u, wu = np.polynomial.legendre.leggauss(max(64, int(math.ceil(2 * L / dx)) + 16))
        u, wu = L * u, L * wu
        Wi = _image_weights(profile, weight, L, u)
        far_mass = float(np.sum(wu * Wi))
        M += np.exp(1j * np.outer(xi, u)) @ (wu * Wi) - far_mass
        info["image_mass"] = far_mass
        if case == "P1" and L < 1.0:
            raise GridError("P1 needs a half width of at least 1")
    else:
        far = _far_mass(profile, weight, reach)
        M -= far
        info["far_mass"] = far
    if eps == 0.0:
        M += _core_multiplier(profile, weight, zc, xi, case)
    if case == "P3":
        M = M.real.astype(complex)
    M[0] = 0.0
    return M, info


def _far_mass(profile, weight, R):
    ws = 0.5 * (abs(float(weight(np.array(R)))) + abs(float(weight(np.array(-R)))))
    return ws * tail_mass(profile, R)


def lattice_multiplier(profile: LevyProfile, weight, eps: float, grid: SpaceTimeGrid, case: str = "P3"):
    if grid.dimension != 1:
        raise GridError("lattice multipliers are provided for d=1")
    geometry = grid.geometry
    if geometry == "line":
        return _lattice_multiplier(profile, weight, float(eps), 2 * grid.L, 2 * grid.n, case.upper(), "line")
    return _lattice_multiplier(profile, weight, float(eps), grid.L, grid.n, case.upper(), "torus")


def apply_L_eps(profile: LevyProfile, coeff, field, x=None, epsilon: float = 0.0, case: str = "P3",
                grid: SpaceTimeGrid | None = None, report: dict | None = None):
    """L^{kappa, eps} applied to a lattice field (array) or a callable, evaluated at x.

    For arrays, x=None returns the whole lattice. On ``line`` grids the field
    is taken to vanish outside the box.
    """
    case = case.upper()
    if callable(field) and not isinstance(field, np.ndarray):
        return _apply_pointwise(profile, coeff, field, x, epsilon, case, report)
    if grid is None:
        raise ValueError("lattice fields need their grid")
    f = np.asarray(field, dtype=float)
    base, mod, theta = _weight_parts(coeff)
    n = grid.n
    if grid.geometry == "line":
        fp = np.zeros(2 * n)
        fp[n // 2: n // 2 + n] = f
    else:
        fp = f
    F = np.fft.rfft(fp)
    Mb, info = lattice_multiplier(profile, base, epsilon, grid, case)
    out = np.fft.irfft(Mb * F, fp.size)
    if mod is not None:
        Mm, _ = lattice_multiplier(profile, mod, epsilon, grid, case)
        th = np.asarray(theta(grid.x), dtype=float)
        if grid.geometry == "line":
            thp = np.zeros(2 * n)
            thp[n // 2: n // 2 + n] = th
            th = thp
        out = out + th * np.fft.irfft(Mm * F, fp.size)
    if grid.geometry == "line":
        out = out[n // 2: n // 2 + n]
    if report is not None:
        report.update(info)
    if x is None:
        return out
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    # trigonometric interpolation: exact at lattice points
    vals = np.array([_trig_eval(out, grid, xx) for xx in xs])
    return vals[0] if np.ndim(x) == 0 else vals


def _trig_eval(vals, grid: SpaceTimeGrid, x: float) -> float:
    j = (x + grid.L) / grid.dx
    k = int(round(j))
    if abs(j - k) < 1e-9:
        return float(vals[k % grid.n])
    F = np.fft.rfft(vals)
    xi = grid.xi
    c = np.exp(1j * xi * (x + grid.L))
    wts = np.full(xi.size, 2.0)
    wts[0] = 1.0
    if grid.n % 2 == 0:
        wts[-1] = 1.0
        c[-1] = np.cos(xi[-1] * (x + grid.L))
    return float(np.real(np.sum(wts * F * c)) / grid.n)


def _apply_pointwise(profile, coeff, f, x, eps, case, report):
    """Adaptive ring quadrature for a callable field in d=1; far jumps beyond R_FAR bounded."""
    if profile.dimension != 1:
        raise NotImplementedError("pointwise application is provided for d=1")
    x = float(x)
    if isinstance(coeff, CoefficientField):
        W = lambda z: float(coeff(x, np.array(z))) * float(profile.J(np.array(z)))
        kap1 = coeff.kappa1
    else:
        W = lambda z: float(coeff(np.array(z))) * float(profile.J(np.array(z)))
        kap1 = float(max(abs(coeff(np.array(R_FAR))), abs(coeff(np.array(-R_FAR)))))
    f0 = float(f(x))
    h = 1e-4
    grad = (f(x + h) - f(x - h)) / (2 * h) if case == "P1" else 0.0

    def integrand(r):
        a = (f(x + r) - f0) * W(r) + (f(x - r) - f0) * W(-r)
        if case == "P1" and r < 1.0:
            a -= grad * r * (W(r) - W(-r))
        return a

    lo = eps if eps > 0 else 0.0
    total = 0.0
    edges = [lo] + [e for e in (1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0, 1000.0, R_FAR) if e > lo]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        for a, b in zip(edges[:-1], edges[1:]):
            total += integrate.quad(integrand, a, b, limit=400, epsabs=1e-13, epsrel=1e-11)[0]
    # jumps past R_FAR: the -f(x) part is exact, the f(x + z) part is only bounded
    tail = tail_mass(profile, R_FAR)
    nu_far = float(profile.nu(np.array(R_FAR)))
    if tail > 0 and nu_far > 0:
        total -= f0 * 0.5 * (W(R_FAR) + W(-R_FAR)) / nu_far * tail
    far = np.concatenate([-np.geomspace(R_FAR, 1e3 * R_FAR, 400), np.geomspace(R_FAR, 1e3 * R_FAR, 400)])
    sup = max(abs(float(f(x + s))) for s in far)
    bound = kap1 * sup * tail
    if report is not None:
        report.update({"tail_bound": bound, "r_far": R_FAR})
    return total


def time_derivative(field_over_times, t: float, x=None):
    """Three-point non-uniform central difference at an interior time node."""
    times = np.asarray(field_over_times.times if hasattr(field_over_times, "times") else field_over_times[0])
    vals = np.asarray(field_over_times.values if hasattr(field_over_times, "values") else field_over_times[1])
    k = int(np.argmin(np.abs(times - t)))
    if abs(times[k] - t) > 1e-9 * max(1.0, t):
        raise GridError(f"time {t} is not a node")
    if k == 0 or k == len(times) - 1:
        raise GridError("boundary time nodes have no central difference")
    h1, h2 = times[k] - times[k - 1], times[k + 1] - times[k]
    d = (-h2 / (h1 * (h1 + h2)) * vals[k - 1] + (h2 - h1) / (h1 * h2) * vals[k]
         + h1 / (h2 * (h1 + h2)) * vals[k + 1])
    if x is None:
        return d
    return d[x] if isinstance(x, (int, np.integer)) else d


def _torus_distance(grid, x, y):
    d = np.abs(np.asarray(x) - y)
    return np.minimum(d, 2 * grid.L - d) if grid.geometry == "torus" else d


def pde_residual(profile: LevyProfile, coeff, kernel, epsilon: float, case: str = "P3",
                 times=None) -> tuple[np.ndarray, np.ndarray]:
    """(interior times, r(t, x)) with r = (∂_t p - L^{kappa,eps} p) / (t^{-1} rho_t(y - x))."""
    grid = kernel.grid
    tt = np.asarray(grid.times)
    idx = range(1, len(tt) - 1) if times is None else [grid.time_index(t) for t in times]
    rows, used = [], []
    dist = _torus_distance(grid, grid.x, kernel.y)
    for k in idx:
        t = float(tt[k])
        dt = time_derivative(kernel, t)
        Lp = apply_L_eps(profile, coeff, kernel.values[k], None, epsilon, case, grid=grid)
        norm = bound_rho(profile, t, dist) / t
        rows.append((dt - Lp) / norm)
        used.append(t)
    return np.array(used), np.array(rows)


def generator_on_test_functions(profile: LevyProfile, coeff, grid: SpaceTimeGrid, f, t: float,
                                case: str = "P3", engine=None, steps: int = 32,
                                probes=None) -> float:
    """max |P_t f - f - ∫_0^t P_s L f ds| over probe lattice points.

    L f uses the ring quadrature (eps = 0); the time integral uses Gauss-Legendre
    nodes in s. With an engine the semigroup of the variable coefficient is used,
    otherwise the exact frozen semigroup of a constant coefficient.
    """
    f = np.asarray(f, dtype=float)
    if not np.any(f):
        return 0.0
    Lf = apply_L_eps(profile, coeff, f, None, 0.0, case, grid=grid)
    s, w = np.polynomial.legendre.leggauss(steps)
    s = 0.5 * t * (s + 1)
    w = 0.5 * t * w
    if engine is None:
        from .symbol import affine_exponent
        th = 0.0 if not isinstance(coeff, CoefficientField) else float(coeff.theta_at(0.0))
        if isinstance(coeff, CoefficientField) and not coeff.is_constant:
            raise ValueError("variable coefficients need a parametrix engine")
        psi = affine_exponent(profile, coeff, case).at_theta(th, grid.xi)
        P = lambda g, tau: np.fft.irfft(np.exp(-tau * psi) * np.fft.rfft(g), grid.n)
        lhs = P(f, t) - f
        rhs = sum(wk * P(Lf, sk) for sk, wk in zip(s, w))
    else:
        from .frozen import SpaceTimeGrid as _G
        from .parametrix import ParametrixEngine
        g2 = _G(grid.L, grid.n, np.concatenate([np.sort(s), [t]]))
        e2 = ParametrixEngine(engine.profile, engine.coeff, g2, engine.case,
                              series_tol=engine.series_tol, certificate=engine.cert)
        PL = e2.apply(Lf)
        order = np.argsort(s)
        rhs = np.zeros(grid.n)
        for j, k in enumerate(order):
            rhs += w[k] * PL[j]
        lhs = e2.apply(f)[-1] - f
    dev = np.abs(lhs - rhs)
    if probes is not None:
        dev = dev[[grid.index_of(p) for p in probes]]
    return float(dev.max())


def eigen_check(profile: LevyProfile, coeff, grid: SpaceTimeGrid, xi0: float, case: str = "P3",
                epsilon: float = 0.0) -> float:
    """max |L cos(xi0 x) + Re psi(xi0) cos(xi0 x)| for a lattice frequency xi0 (P3)."""
    from .symbol import frozen_exponent
    f = np.cos(xi0 * grid.x)
    Lf = apply_L_eps(profile, coeff, f, None, epsilon, case, grid=grid)
    w = 0.0
    psi = float(np.real(frozen_exponent(profile, coeff, w, np.array([xi0]), case)[0]))
    return float(np.max(np.abs(Lf + psi * f)))
