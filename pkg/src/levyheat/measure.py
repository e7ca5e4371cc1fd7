"""Radial Lévy densities and the scale functions built from them.

For a radial density nu on R^d the two scale functions are

    h(r) = ∫ (1 ∧ |x|²/r²) nu(|x|) dx,      K(r) = r^{-2} ∫_{|x|<r} |x|² nu(|x|) dx,

and the bound function is rho_t(x) = [h^{-1}(1/t)]^{-d} ∧ t K(|x|) / |x|^d.
Radial integrals are evaluated in the variable v = log r, which turns the
power singularity at the origin and algebraic tails into exponentially or
algebraically decaying integrands on the whole line.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy import integrate, optimize
from scipy.interpolate import CubicSpline

OMEGA = {1: 2.0, 2: 2.0 * math.pi}
"""Surface measure of the unit sphere (omega_1 = 2 counts the two points of S^0)."""

R_WINDOW = (1e-9, 1e9)
# slowly varying profiles (and extreme arguments) may need h^-1 far outside the tabulated window
R_FAR_LIMIT = 1e300


class DivergentIntegralError(ArithmeticError):
    pass


class OutOfRangeError(ValueError):
    pass


class NoCertificateError(ValueError):
    pass


class BracketError(ArithmeticError):
    pass


class InadmissibleCaseError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class LevyProfile:
    """Radial Lévy density with an optional non-symmetric full density.

    ``lognu(v)`` is log nu(e^v); working in log-radius keeps extreme radii
    finite. ``j_density`` maps points z (shape (..., d) or scalar for d=1)
    to J(z); when absent J(z) = nu(|z|).
    """

    lognu: Callable
    dimension: int = 1
    j_density: Callable | None = None
    comparability: float = 1.0
    sing_exponent_hint: float | None = None
    support_radius: float = math.inf
    tail: str = "power"
    name: str = "custom"
    params: dict = field(default_factory=dict)
    skew: float = 0.0

    def nu(self, r):
        r = np.asarray(r, dtype=float)
        with np.errstate(divide="ignore", over="ignore"):
            out = np.exp(self.lognu(np.log(r)))
        return np.where(r > 0, out, np.inf)

    def J(self, z):
        """Full jump density; for d=1 z is an array of reals."""
        if self.j_density is not None:
            return self.j_density(z)
        z = np.asarray(z, dtype=float)
        r = np.abs(z) if self.dimension == 1 else np.linalg.norm(z, axis=-1)
        return self.nu(r)

    @property
    def symmetric(self) -> bool:
        return self.j_density is None or self.skew == 0.0

    @property
    def omega(self) -> float:
        return OMEGA[self.dimension]

    @property
    def upper_cut(self) -> float:
        """Radius beyond which nu vanishes or is negligible."""
        if math.isfinite(self.support_radius):
            return self.support_radius
        if self.tail == "exponential":
            rate = self.params.get("tempering", 1.0)
            return 80.0 / rate
        return math.inf


# -- builtin profiles -------------------------------------------------------

def stable(alpha: float, d: int = 1) -> LevyProfile:
    _check_alpha(alpha)
    return LevyProfile(
        lognu=lambda v: -(d + alpha) * v,
        dimension=d, sing_exponent_hint=d + alpha, name="stable",
        params={"alpha": alpha},
    )


def truncated_stable(alpha: float, radius: float = 1.0, d: int = 1) -> LevyProfile:
    _check_alpha(alpha)
    lr = math.log(radius)

    def lognu(v):
        v = np.asarray(v, dtype=float)
        return np.where(v <= lr, -(d + alpha) * v, -np.inf)

    return LevyProfile(
        lognu=lognu, dimension=d, sing_exponent_hint=d + alpha,
        support_radius=radius, tail="compact", name="truncated_stable",
        params={"alpha": alpha, "truncation_radius": radius},
    )


def tempered_stable(alpha: float, rate: float = 1.0, d: int = 1) -> LevyProfile:
    _check_alpha(alpha)
    return LevyProfile(
        lognu=lambda v: -(d + alpha) * np.asarray(v, dtype=float) - rate * np.exp(v),
        dimension=d, sing_exponent_hint=d + alpha, tail="exponential",
        name="tempered_stable", params={"alpha": alpha, "tempering": rate},
    )


def log_profile(alpha: float, d: int = 1) -> LevyProfile:
    """nu(r) = r^{-d} [log(1 + r^{alpha/2})]^{-2}: scaling index alpha at 0, no log moment."""
    _check_alpha(alpha)
    a = alpha / 2.0

    def lognu(v):
        v = np.asarray(v, dtype=float)
        w = a * v
        mid = np.clip(w, -30.0, 30.0)
        ll = np.where(w < -30.0, w, np.where(w > 30.0, np.log(np.maximum(w, 30.0)),
                                              np.log(np.log1p(np.exp(mid)))))
        return -d * v - 2.0 * ll

    return LevyProfile(
        lognu=lognu, dimension=d, sing_exponent_hint=d + alpha, tail="log",
        name="log_profile", params={"alpha": alpha},
    )


def with_skew(profile: LevyProfile, skew: float) -> LevyProfile:
    """J(z) = nu(|z|)(1 + skew sign z) in d=1; comparability 1/(1 - |skew|)."""
    if profile.dimension != 1:
        raise ValueError("skewed densities are only provided in d=1")
    if not -1.0 < skew < 1.0:
        raise ValueError("skew must lie in (-1, 1)")
    base = profile

    def jd(z):
        z = np.asarray(z, dtype=float)
        return base.nu(np.abs(z)) * (1.0 + skew * np.sign(z))

    lam = 1.0 / (1.0 - abs(skew))
    params = dict(profile.params, skew=skew)
    return LevyProfile(
        lognu=profile.lognu, dimension=1, j_density=jd,
        comparability=lam, sing_exponent_hint=profile.sing_exponent_hint,
        support_radius=profile.support_radius, tail=profile.tail,
        name=profile.name, params=params, skew=skew,
    )


def from_density(nu: Callable, d: int = 1, **kw) -> LevyProfile:
    def lognu(v):
        with np.errstate(divide="ignore"):
            return np.log(nu(np.exp(v)))

    return LevyProfile(lognu=lognu, dimension=d, **kw)


def make_profile(family: str, alpha: float, dimension: int = 1,
                 truncation_radius: float | None = None, tempering: float | None = None,
                 comparability: float = 1.0) -> LevyProfile:
    family = family.replace("-", "_")
    if family == "stable":
        p = stable(alpha, dimension)
    elif family == "truncated_stable":
        p = truncated_stable(alpha, truncation_radius or 1.0, dimension)
    elif family == "tempered_stable":
        p = tempered_stable(alpha, tempering or 1.0, dimension)
    elif family in ("log", "log_profile"):
        p = log_profile(alpha, dimension)
    else:
        raise ValueError(f"unknown profile family {family!r}")
    if comparability != 1.0:
        # skew s gives J between nu/lambda and (2 - 1/lambda) nu with lambda = 1/(1 - s)
        p = with_skew(p, 1.0 - 1.0 / comparability)
    return p


def _check_alpha(alpha):
    if not 0.0 < alpha < 2.0:
        raise ValueError("alpha must lie in (0, 2)")


def check_profile(profile: LevyProfile, n: int = 400, seed: int = 0) -> None:
    """Sampled invariants: monotone nu, Lévy integrability, comparability, h(0+) = inf."""
    r = np.logspace(-8, 6, n)
    nu = profile.nu(r)
    if np.any(np.diff(nu) > 1e-12 * np.abs(nu[:-1])):
        raise ValueError("nu is not non-increasing")
    hs = h_of(profile, np.array([1e-8, 1e-4, 1.0]))
    if not (hs[0] > hs[1] > hs[2]):
        raise ValueError("h does not blow up at the origin")
    if profile.j_density is not None:
        rng = np.random.default_rng(seed)
        z = rng.standard_normal((200, profile.dimension)) * np.exp(rng.uniform(-5, 5, (200, 1)))
        z = z[:, 0] if profile.dimension == 1 else z
        rz = np.abs(z) if profile.dimension == 1 else np.linalg.norm(z, axis=-1)
        jz, nz = profile.J(z), profile.nu(rz)
        lam = profile.comparability
        if np.any(jz > lam * nz * (1 + 1e-12)) or np.any(jz < nz / lam * (1 - 1e-12)):
            raise ValueError("J violates the comparability bounds")


# -- radial quadrature ------------------------------------------------------

def radial_integral(profile: LevyProfile, logg: Callable, a: float, b: float) -> float:
    """omega_d ∫_a^b g(s) nu(s) s^{d-1} ds with g given through log g(v), v = log s."""
    d = profile.dimension
    b = min(b, profile.upper_cut)
    if b <= a:
        return 0.0
    lo = -np.inf if a <= 0 else math.log(a)
    hi = np.inf if not math.isfinite(b) else math.log(b)

    def f(v):
        e = logg(v) + profile.lognu(v) + d * v
        return math.exp(e) if e > -745.0 else 0.0

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = _quad_split(f, lo, hi)
    if not np.isfinite(val) or err > 1e-7 * max(abs(val), 1e-300):
        raise DivergentIntegralError(f"radial integral on [{a}, {b}] did not converge")
    return profile.omega * val


def _quad_split(f, lo, hi):
    """quad with the infinite ends handled separately from a finite middle."""
    if math.isfinite(lo) and math.isfinite(hi):
        pieces = [(lo, hi)]
    elif math.isfinite(hi):
        pieces = [(-np.inf, hi - 20.0), (hi - 20.0, hi)]
    elif math.isfinite(lo):
        pieces = [(lo, lo + 20.0), (lo + 20.0, np.inf)]
    else:
        pieces = [(-np.inf, -20.0), (-20.0, 20.0), (20.0, np.inf)]
    tot, err = 0.0, 0.0
    for a, b in pieces:
        v, e = integrate.quad(f, a, b, epsabs=0.0, epsrel=1e-12, limit=400)
        tot += v
        err += e
    return tot, err


def _h_scalar(profile, r):
    lr = math.log(r)
    inner = radial_integral(profile, lambda v: 2.0 * (v - lr), 0.0, r)
    outer = radial_integral(profile, lambda v: 0.0, r, math.inf)
    return inner + outer


def _K_scalar(profile, r):
    lr = math.log(r)
    return radial_integral(profile, lambda v: 2.0 * (v - lr), 0.0, r)


def h_of(profile: LevyProfile, r):
    """h(r) = ∫ (1 ∧ |x|²/r²) nu(|x|) dx by quadrature."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise ValueError("r must be positive")
    return np.vectorize(lambda s: _h_scalar(profile, float(s)), otypes=[float])(r)[()]


def K_of(profile: LevyProfile, r):
    """K(r) = r^{-2} ∫_{|x|<r} |x|² nu(|x|) dx by quadrature."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise ValueError("r must be positive")
    return np.vectorize(lambda s: _K_scalar(profile, float(s)), otypes=[float])(r)[()]


def tail_mass(profile: LevyProfile, r: float) -> float:
    """∫_{|z| >= r} nu(|z|) dz."""
    return radial_integral(profile, lambda v: 0.0, r, math.inf)


def second_moment(profile: LevyProfile, r: float) -> float:
    """∫_{|z| < r} |z|² nu(|z|) dz."""
    return radial_integral(profile, lambda v: 2.0 * v, 0.0, r)


@lru_cache(maxsize=4096)
def _h_inverse_cached(profile, u, tol):
    p = profile.sing_exponent_hint
    alpha = (p - profile.dimension) if p else 1.0
    h1 = _h_scalar(profile, 1.0)
    guess = (h1 / u) ** (1.0 / alpha) if alpha > 0 else 1.0
    guess = min(max(guess, R_WINDOW[0]), R_WINDOW[1])
    lo = hi = guess
    g = lambda lr: math.log(_h_scalar(profile, math.exp(lr))) - math.log(u)
    while g(math.log(lo)) < 0:
        if lo <= 1.0 / R_FAR_LIMIT:
            raise OutOfRangeError(f"h^-1({u}) is below the working radius window")
        lo = max(lo / (4.0 if lo > R_WINDOW[0] else 1e8), 1.0 / R_FAR_LIMIT)
    while g(math.log(hi)) > 0:
        if hi >= R_FAR_LIMIT:
            raise OutOfRangeError(f"h^-1({u}) is above the working radius window")
        hi = min(hi * (4.0 if hi < R_WINDOW[1] else 1e8), R_FAR_LIMIT)
    if lo == hi:
        return lo
    lr = optimize.brentq(g, math.log(lo), math.log(hi), xtol=tol * 1e-2, rtol=4 * np.finfo(float).eps,
                         maxiter=200)
    return math.exp(lr)


def h_inverse(profile: LevyProfile, u, tol: float = 1e-10):
    """Unique r with h(r) = u; bracketed root search on log r."""
    u = np.asarray(u, dtype=float)
    if np.any(u <= 0):
        raise ValueError("u must be positive")
    return np.vectorize(lambda s: _h_inverse_cached(profile, float(s), tol), otypes=[float])(u)[()]


# -- tabulated scale functions for bulk evaluation ---------------------------

class _RadialTable:
    """Log-log cubic splines of h and K, split at the support radius."""

    def __init__(self, profile: LevyProfile, per_decade: int = 24):
        lo, hi = math.log10(R_WINDOW[0]), math.log10(R_WINDOW[1])
        r = np.logspace(lo, hi, int((hi - lo) * per_decade) + 1)
        breaks = [R_WINDOW[0], R_WINDOW[1]]
        R = profile.support_radius
        if math.isfinite(R) and breaks[0] < R < breaks[1]:
            r = np.unique(np.concatenate([r, [R]]))
            breaks = [breaks[0], R, breaks[1]]
        self.breaks = breaks
        self.h_spl, self.K_spl = [], []
        for a, b in zip(breaks[:-1], breaks[1:]):
            rr = r[(r >= a) & (r <= b)]
            lr = np.log(rr)
            self.h_spl.append(CubicSpline(lr, np.log(h_of(profile, rr))))
            self.K_spl.append(CubicSpline(lr, np.log(K_of(profile, rr))))
        self.profile = profile

    def _eval(self, spls, exact, r):
        r = np.asarray(r, dtype=float)
        out = np.empty(r.shape)
        inside = (r >= self.breaks[0]) & (r <= self.breaks[-1])
        lr = np.log(np.where(inside, r, 1.0))
        for i, spl in enumerate(spls):
            a, b = self.breaks[i], self.breaks[i + 1]
            m = inside & (r >= a) & (r <= b)
            out[m] = np.exp(spl(lr[m]))
        if np.any(~inside):
            out[~inside] = exact(self.profile, r[~inside])
        return out

    def h(self, r):
        return self._eval(self.h_spl, h_of, r)

    def K(self, r):
        return self._eval(self.K_spl, K_of, r)


@lru_cache(maxsize=64)
def radial_table(profile: LevyProfile) -> _RadialTable:
    return _RadialTable(profile)


def _radius(profile, x):
    x = np.asarray(x, dtype=float)
    if profile.dimension == 1:
        return np.abs(x)
    return np.linalg.norm(x, axis=-1)


def rho_radial(profile: LevyProfile, t: float, r):
    """Bound function as a function of |x|."""
    d = profile.dimension
    top = h_inverse(profile, 1.0 / t) ** (-d)
    r = np.asarray(r, dtype=float)
    pos = r > 0
    out = np.full(r.shape, top)
    if np.any(pos):
        rp = r[pos]
        out[pos] = np.minimum(top, t * radial_table(profile).K(rp) / rp ** d)
    return out[()] if out.ndim == 0 else out


def bound_rho(profile: LevyProfile, t: float, x):
    """rho_t(x) = [h^-1(1/t)]^{-d} ∧ t K(|x|)/|x|^d (points x of shape (..., d) when d=2)."""
    if t <= 0:
        raise ValueError("t must be positive")
    return rho_radial(profile, t, _radius(profile, x))


def err_fn(profile: LevyProfile, gamma: float, beta: float, t: float, x):
    """[h^-1(1/t)]^gamma (|x|^beta ∧ 1) t^{-1} rho_t(x)."""
    r = _radius(profile, x)
    H = h_inverse(profile, 1.0 / t)
    return H ** gamma * np.minimum(r ** beta, 1.0) / t * rho_radial(profile, t, r)


def rho_crossover(profile: LevyProfile, t: float) -> float:
    """Radius where the two branches of rho_t meet; must lie in [h^-1(3/t), h^-1(1/t)]."""
    d = profile.dimension
    top = h_inverse(profile, 1.0 / t) ** (-d)
    g = lambda lr: math.log(t * _K_scalar(profile, math.exp(lr))) - d * lr - math.log(top)
    lo, hi = math.log(h_inverse(profile, 3.0 / t)), math.log(h_inverse(profile, 1.0 / t))
    a, b = lo - 1.0, hi + 1.0
    for _ in range(60):
        if g(a) > 0 and g(b) < 0:
            break
        a -= 1.0
        b += 1.0
    else:
        raise BracketError("no sign change found for the crossover equation")
    r0 = math.exp(optimize.brentq(g, a, b, xtol=1e-14, rtol=1e-13))
    if not (math.exp(lo) * (1 - 1e-9) <= r0 <= math.exp(hi) * (1 + 1e-9)):
        raise BracketError(f"crossover {r0} outside [h^-1(3/t), h^-1(1/t)]")
    return r0


# -- weak scaling certificates ----------------------------------------------

@dataclass(frozen=True)
class ScalingCertificate:
    alpha_h: float
    C_h: float
    beta_h: float | None
    c_h: float | None
    theta_h: float
    fit_residual: float
    r_window: tuple = (0.0, 0.0)

    def stretched(self, R: float) -> "ScalingCertificate":
        """Extend the scaling range from theta_h to R > theta_h at the price of (R/theta_h)^2."""
        if R <= self.theta_h:
            return self
        f = (R / self.theta_h) ** 2
        return ScalingCertificate(self.alpha_h, self.C_h * f, self.beta_h,
                                  None if self.c_h is None else self.c_h / f,
                                  R, self.fit_residual, self.r_window)


def estimate_scaling(profile: LevyProfile, r_window=(1e-6, 1e2), lambda_samples: int = 40,
                     slack: float = 1e-3) -> ScalingCertificate:
    """Fit weak lower/upper scaling of h on a log lattice of the window.

    For each candidate exponent a on a 0.01 grid, C(a) is the largest value of
    h(r) / (lambda^a h(lambda r)) over lattice pairs. C is non-decreasing in a,
    and C(a) = 1 exactly for every a below the infimum of the local exponent;
    the certificate is the largest a with C(a) <= 1 + slack (the smallest
    attainable C_h). The upper index is chosen symmetrically.
    """
    r0, r1 = r_window
    if not (0 < r0 < r1):
        raise ValueError("bad radius window")
    R = profile.support_radius
    theta = min(r1, R) if math.isfinite(R) else r1
    r = np.geomspace(r0, theta, lambda_samples)
    lh = np.log(radial_table(profile).h(r)) if r0 >= R_WINDOW[0] else np.log(h_of(profile, r))
    lr = np.log(r)
    i, j = np.triu_indices(len(r), k=1)            # r[i] < r[j]; lambda = r_i / r_j
    dlh = lh[i] - lh[j]                            # log h(lambda r) - log h(r) >= 0
    dlr = lr[j] - lr[i]                            # -log lambda > 0
    if np.any(dlh < -1e-12):
        raise NoCertificateError("h is not monotone on the window")
    cands = np.round(np.arange(0.01, 2.0 + 1e-9, 0.01), 2)
    # log C(a) = max(-dlh + a dlr); log c(b) = min(-dlh + b dlr)
    logC = np.array([np.max(-dlh + a * dlr) for a in cands])
    logc = np.array([np.min(-dlh + b * dlr) for b in cands])
    okC = logC <= math.log1p(slack)
    okc = logc >= math.log1p(-slack)
    if not okC.any():
        raise NoCertificateError("no lower scaling exponent admits a bounded constant")
    k = np.nonzero(okC)[0].max()
    alpha_h, C_h = float(cands[k]), float(max(1.0, math.exp(logC[k])))
    beta_h = c_h = None
    if okc.any():
        m = np.nonzero(okc)[0].min()
        beta_h, c_h = float(cands[m]), float(min(1.0, math.exp(logc[m])))
    # residual on a shifted lattice
    rv = np.geomspace(r0 * 1.07, theta / 1.03, lambda_samples + 7)
    lhv = np.log(h_of(profile, rv))
    lrv = np.log(rv)
    i, j = np.triu_indices(len(rv), k=1)
    dlh, dlr = lhv[i] - lhv[j], lrv[j] - lrv[i]
    res = max(0.0, float(np.max(-dlh + alpha_h * dlr) - math.log(C_h)))
    if beta_h is not None:
        res = max(res, float(math.log(c_h) - np.min(-dlh + beta_h * dlr)))
    return ScalingCertificate(alpha_h, C_h, beta_h, c_h, float(theta), math.expm1(res),
                              (float(r0), float(r1)))


def validate_case(case: str, cert: ScalingCertificate, profile: LevyProfile, coeff=None) -> None:
    case = case.upper()
    if case == "P1":
        if not cert.alpha_h > 1.0:
            raise InadmissibleCaseError("P1 needs a certified alpha_h > 1")
    elif case == "P2":
        if cert.beta_h is None or not cert.beta_h < 1.0:
            raise InadmissibleCaseError("P2 needs a certified beta_h < 1")
    elif case == "P3":
        if not profile.symmetric or (coeff is not None and not coeff.z_symmetric):
            raise InadmissibleCaseError("P3 needs symmetric J and kappa even in z")
    else:
        raise InadmissibleCaseError(f"unknown case {case!r}")
