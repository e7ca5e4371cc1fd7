"""Coefficient fields and characteristic exponents of frozen operators.

A coefficient is stored in the affine form

    kappa(x, z) = base(z) + theta(x) * mod(z),

which covers the constant, tanh-ramp and cosine-modulated builtins. The
exponent frozen at w is then psi_w = psi[base] + theta(w) psi[mod], where
psi[m] is the exponent of the jump density m(z) J(z):

    P1: ∫ (1 - e^{i xi z} + i xi z 1_{|z|<1}) m J dz
    P2: ∫ (1 - e^{i xi z}) m J dz
    P3: ∫ (1 - cos xi z) m J dz
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy import integrate, special
from scipy.interpolate import CubicSpline

from .measure import DivergentIntegralError, LevyProfile, h_of

CASES = ("P1", "P2", "P3")


def _one(z):
    z = np.asarray(z, dtype=float)
    return np.ones(z.shape if z.ndim == 0 or z.shape[-1:] != (2,) else z.shape[:-1])


def _zero(z):
    return 0.0 * _one(z)


def _lorentz(z):
    z = np.asarray(z, dtype=float)
    r2 = z * z if z.ndim == 0 or z.shape[-1:] != (2,) else np.sum(z * z, axis=-1)
    return 1.0 / (1.0 + r2)


@dataclass(frozen=True, eq=False)
class CoefficientField:
    base: Callable = _one
    mod: Callable = _zero
    theta: Callable = _zero
    theta_range: tuple = (0.0, 0.0)
    kappa0: float = 1.0
    kappa1: float = 1.0
    kappa2: float = 0.0
    beta: float = 0.5
    z_symmetric: bool = True
    name: str = "constant"
    params: dict = field(default_factory=dict)
    dimension: int = 1

    def __post_init__(self):
        if not 0.0 < self.beta < 1.0:
            raise ValueError("Hölder exponent beta must lie in (0, 1)")
        if not 0.0 < self.kappa0 <= self.kappa1:
            raise ValueError("need 0 < kappa0 <= kappa1")

    def theta_at(self, x):
        x = np.asarray(x, dtype=float)
        if self.dimension == 2:
            return self.theta(x)
        return self.theta(x)

    def __call__(self, x, z):
        return self.base(z) + self.theta_at(x) * self.mod(z)

    kappa = __call__

    @property
    def is_constant(self) -> bool:
        return self.theta_range[0] == self.theta_range[1] or self.mod is _zero

    def frozen_weight(self, w) -> Callable:
        """z -> kappa(w, z)."""
        th = float(np.asarray(self.theta_at(w)).reshape(-1)[0])
        b, m = self.base, self.mod
        return lambda z: b(z) + th * m(z)

    def scaled(self, c: float) -> "CoefficientField":
        b, m, th = self.base, self.mod, self.theta
        return replace(self, base=lambda z: c * b(z), mod=lambda z: c * m(z),
                       kappa0=c * self.kappa0, kappa1=c * self.kappa1, kappa2=c * self.kappa2,
                       name=f"{self.name}*{c}")

    def periodized(self, L: float, collar: float | None = None) -> "CoefficientField":
        """Blend theta to a constant near x = ±L so it is smooth on the torus [-L, L).

        Inside |x| <= L - collar the field is unchanged; the blend keeps theta
        inside theta_range, so kappa0 and kappa1 are preserved.
        """
        if self.is_constant:
            return self
        c = L / 4.0 if collar is None else collar
        th = self.theta
        ends = np.array([-L, L], dtype=float)
        if self.dimension == 2:
            ends = np.array([[-L, 0.0], [L, 0.0]])
        te = np.asarray(th(ends), dtype=float)
        eps = 1e-6 * L
        de = (np.asarray(th(ends + eps), dtype=float) - np.asarray(th(ends - eps), dtype=float)) / (2 * eps)
        if abs(te[0] - te[1]) < 1e-13 and abs(de[0] - de[1]) < 1e-9:
            return self
        tbar = 0.5 * (te[0] + te[1])

        def theta_p(x):
            x = np.asarray(x, dtype=float)
            coords = x if self.dimension == 1 else x[..., 0]
            b = _smoothstep((np.abs(coords) - (L - c)) / (0.5 * c))
            if self.dimension == 2:
                b = np.maximum(b, _smoothstep((np.abs(x[..., 1]) - (L - c)) / (0.5 * c)))
            return (1.0 - b) * th(x) + b * tbar

        xs = np.linspace(-L, L, 4097)
        pts = xs if self.dimension == 1 else np.stack([xs, 0 * xs], -1)
        tv = theta_p(pts)
        dx = np.abs(np.subtract.outer(xs, xs))
        dv = np.abs(np.subtract.outer(tv, tv))
        with np.errstate(divide="ignore", invalid="ignore"):
            q = np.where(dx > 0, dv / np.minimum(dx, 1.0) ** self.beta, 0.0)
        k2 = max(self.kappa2, 1.05 * float(q.max()) * self._mod_sup())
        return replace(self, theta=theta_p, kappa2=k2, name=self.name + "@torus",
                       params=dict(self.params, collar=c, half_width=L))

    def _mod_sup(self) -> float:
        z = np.concatenate([-np.logspace(-6, 6, 200), np.logspace(-6, 6, 200)])
        if self.dimension == 2:
            z = np.stack([z, 0 * z], -1)
        return float(np.max(np.abs(self.mod(z))))

    def check(self, n: int = 2000, seed: int = 0, L: float = 50.0) -> None:
        """Sampled bounds, Hölder modulus and z-symmetry."""
        rng = np.random.default_rng(seed)
        d = self.dimension
        x = rng.uniform(-L, L, (n, d)) if d == 2 else rng.uniform(-L, L, n)
        y = x + rng.standard_normal(x.shape) * np.exp(rng.uniform(-6, 1, x.shape if d == 1 else (n, 1)))
        zr = rng.standard_normal((n, d)) * np.exp(rng.uniform(-5, 5, (n, 1)))
        z = zr[:, 0] if d == 1 else zr
        k = self(x, z)
        if np.any(k < self.kappa0 * (1 - 1e-12)) or np.any(k > self.kappa1 * (1 + 1e-12)):
            raise ValueError("kappa leaves [kappa0, kappa1]")
        dist = np.abs(x - y) if d == 1 else np.linalg.norm(x - y, axis=-1)
        diff = np.abs(self(x, z) - self(y, z))
        if np.any(diff > self.kappa2 * dist ** self.beta * (1 + 1e-9) + 1e-14):
            raise ValueError("kappa violates the Hölder bound")
        if self.z_symmetric and np.any(np.abs(self(x, z) - self(x, -z)) > 1e-12):
            raise ValueError("kappa is not even in z")


def _smoothstep(u):
    u = np.clip(np.asarray(u, dtype=float), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        a = np.where(u > 0, np.exp(-1.0 / np.where(u > 0, u, 1.0)), 0.0)
        b = np.where(u < 1, np.exp(-1.0 / np.where(u < 1, 1.0 - u, 1.0)), 0.0)
    return np.where(u >= 1, 1.0, np.where(u <= 0, 0.0, a / (a + b)))


def constant(c0: float = 1.0, d: int = 1) -> CoefficientField:
    return CoefficientField(base=lambda z: c0 * _one(z), kappa0=c0, kappa1=c0, name="constant",
                            params={"c0": c0}, dimension=d)


def tanh_ramp(amp: float = 0.25, center: float = 0.0, width: float = 1.0, level: float = 1.0,
              beta: float = 0.99, d: int = 1) -> CoefficientField:
    """kappa(x, z) = level + amp (1 + tanh((x_1 - center)/width)) / 2."""
    if amp < 0 or level <= 0:
        raise ValueError("need amp >= 0 and level > 0")

    def theta(x):
        x = np.asarray(x, dtype=float)
        c = x if d == 1 else x[..., 0]
        return 0.5 * amp * (1.0 + np.tanh((c - center) / width))

    return CoefficientField(
        base=lambda z: level * _one(z), mod=_one, theta=theta, theta_range=(0.0, amp),
        kappa0=level, kappa1=level + amp, kappa2=amp * (0.5 / width) ** beta, beta=beta,
        name="tanh-ramp", params={"amp": amp, "center": center, "width": width, "level": level},
        dimension=d)


def cosine_modulated(amp: float = 0.25, omega: float = 1.0, level: float = 1.0,
                     beta: float = 0.99, d: int = 1) -> CoefficientField:
    """kappa(x, z) = level + amp cos(omega x_1) / (1 + |z|^2)."""
    if not 0 <= amp < level:
        raise ValueError("need 0 <= amp < level")

    def theta(x):
        x = np.asarray(x, dtype=float)
        c = x if d == 1 else x[..., 0]
        return amp * np.cos(omega * c)

    return CoefficientField(
        base=lambda z: level * _one(z), mod=_lorentz, theta=theta, theta_range=(-amp, amp),
        kappa0=level - amp, kappa1=level + amp, kappa2=2.0 * amp * (0.5 * omega) ** beta,
        beta=beta, name="cosine-modulated",
        params={"amp": amp, "omega": omega, "level": level}, dimension=d)


def make_coefficient(kind: str, d: int = 1, **params) -> CoefficientField:
    kind = kind.replace("_", "-")
    if kind == "constant":
        return constant(params.get("c0", 1.0), d)
    if kind == "tanh-ramp":
        return tanh_ramp(d=d, **params)
    if kind == "cosine-modulated":
        return cosine_modulated(d=d, **params)
    raise ValueError(f"unknown coefficient {kind!r}; builtins are constant, tanh-ramp, cosine-modulated")


# -- exponent quadrature -------------------------------------------------------

def _quad(f, a, b, **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        v, e = integrate.quad(f, a, b, epsabs=0.0, epsrel=1e-12, limit=500, **kw)
    if not math.isfinite(v) or e > 1e-6 * max(abs(v), 1e-200):
        raise DivergentIntegralError("exponent quadrature did not converge")
    return v


def _quad_tail(f, a, b, scale=1.0, **kw):
    """Oscillatory quad; the infinite-range variant only honours an absolute tolerance."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        if math.isfinite(b):
            v, e = integrate.quad(f, a, b, epsabs=1e-14 * scale, epsrel=1e-12, limit=2000, **kw)
        else:
            v, e = integrate.quad(f, a, b, epsabs=1e-14 * scale, limlst=200, limit=2000, **kw)
    if not math.isfinite(v):
        raise DivergentIntegralError("oscillatory tail did not converge")
    return v, e


def _logint(f, lo, hi):
    """∫_lo^hi f(v) dv with lo possibly -inf."""
    if not math.isfinite(lo):
        return _quad(f, -np.inf, hi - 25.0) + _quad(f, hi - 25.0, hi)
    return _quad(f, lo, hi)


def _jratio(profile: LevyProfile, z):
    if profile.j_density is None:
        return 1.0
    if profile.skew:
        return 1.0 + profile.skew * np.sign(z)
    z = np.asarray(z, dtype=float)
    return profile.j_density(z) / profile.nu(np.abs(z))


def _er(v):
    return math.exp(min(v, 700.0))


def _log2sin2(lx):
    """log(2 sin^2(x/2)) for x = e^lx <= 1, accurate as x -> 0."""
    if lx < -7.0:
        x = math.exp(lx)
        return 2.0 * lx - math.log(2.0) - x * x / 12.0
    return math.log(2.0 * math.sin(0.5 * math.exp(lx)) ** 2)


def _exponent_1d(profile: LevyProfile, weight: Callable, xi: float, case: str) -> complex:
    if xi == 0.0:
        return 0.0j
    sgn = 1.0 if xi > 0 else -1.0
    k = abs(xi)
    lk = math.log(k)
    cut = profile.upper_cut
    lognu = profile.lognu

    def wsum(r):
        return float(weight(r) * _jratio(profile, r) + weight(-r) * _jratio(profile, -r))

    def wdiff(r):
        return float(weight(r) * _jratio(profile, r) - weight(-r) * _jratio(profile, -r))

    def ex(e):
        return math.exp(e) if e > -745.0 else 0.0

    rc = min(1.0 / k, cut)
    lrc = math.log(rc)
    # the integrands below carry nu(e^v) e^v in log form: lognu(v) + v
    re = _logint(lambda v: ex(_log2sin2(lk + v) + lognu(v) + v) * wsum(_er(v)), -np.inf, lrc)
    if rc < cut:
        m = lambda v: ex(lognu(v) + v) * wsum(_er(v))
        if math.isfinite(cut):
            mass = _quad(m, lrc, math.log(cut))
        else:
            mass = _quad(m, lrc, lrc + 30.0) + _quad(m, lrc + 30.0, np.inf)
        osc, _ = _quad_tail(lambda r: float(profile.nu(r)) * wsum(r), rc, cut, scale=mass,
                            weight="cos", wvar=k)
        re += mass - osc
    if case == "P3" or (profile.symmetric and _is_even(weight)):
        return complex(re, 0.0)

    # imaginary part: -∫_0^∞ (sin(k r) - k r 1_{r<1}[P1]) A(r) dr, A = W(r) - W(-r)
    comp = case == "P1"
    a_lo = min(rc, 1.0) if comp else rc

    def f_comp(v):  # (sin x - x) nu e^v A, x = k e^v
        x = k * math.exp(v)
        if x < 0.05:
            x2 = x * x
            mag = 3.0 * (lk + v) - math.log(6.0) + math.log1p(-x2 / 20.0 * (1.0 - x2 / 42.0 * (1 - x2 / 72.0)))
            return -ex(mag + lognu(v) + v) * wdiff(_er(v))
        return (math.sin(x) - x) * ex(lognu(v) + v) * wdiff(_er(v))

    def f_sin(v):
        x = k * math.exp(v)
        lsinc = math.log(math.sin(x) / x) if x > 1e-8 else 0.0
        if x < math.pi:
            return ex(lk + v + lsinc + lognu(v) + v) * wdiff(_er(v))
        return math.sin(x) * ex(lognu(v) + v) * wdiff(_er(v))

    im = _logint(f_comp if comp else f_sin, -np.inf, math.log(a_lo))
    if comp and rc > 1.0:
        im += _quad(f_sin, 0.0, lrc)
    if comp and rc < 1.0:
        im -= _quad(lambda v: ex(lk + v + lognu(v) + v) * wdiff(_er(v)), lrc, 0.0)
    if rc < cut:
        tail, _ = _quad_tail(lambda r: float(profile.nu(r)) * wdiff(r), rc, cut, scale=abs(re),
                             weight="sin", wvar=k)
        im += tail
    return complex(re, -sgn * im)


def _is_even(weight) -> bool:
    z = np.array([1e-3, 0.1, 0.7, 3.0, 40.0])
    return bool(np.allclose(weight(z), weight(-z), rtol=1e-14, atol=0))


def _exponent_2d(profile: LevyProfile, weight: Callable, xi, case: str) -> complex:
    k = float(np.linalg.norm(xi))
    if k == 0.0:
        return 0.0j
    cut = profile.upper_cut
    lognu = profile.lognu

    def wr(r):
        return float(weight(np.array([r, 0.0])))

    def dens(v):  # nu(e^v) 2 pi e^{2v}
        e = lognu(v) + 2.0 * v + math.log(2.0 * math.pi)
        return math.exp(e) if e > -745.0 else 0.0

    def inner(v):  # (1 - J0(x)) dens, x = k e^v
        lx = lk + v
        if lx < -3.0:
            x2 = math.exp(2.0 * lx)
            e = 2.0 * lx - math.log(4.0) + math.log1p(-x2 / 16.0 * (1.0 - x2 / 36.0)) \
                + lognu(v) + 2.0 * v + math.log(2.0 * math.pi)
            return (math.exp(e) if e > -745.0 else 0.0) * wr(_er(v))
        return (1.0 - special.j0(math.exp(lx))) * dens(v) * wr(_er(v))

    lk = math.log(k)
    rc = min(1.0 / k, cut)
    lrc = math.log(rc)
    re = _logint(inner, -np.inf, lrc)
    if rc < cut:
        g = lambda r: 2.0 * math.pi * r * float(profile.nu(r)) * wr(r)
        hi = math.log(cut) if math.isfinite(cut) else np.inf
        if math.isfinite(hi):
            mass = _quad(lambda v: dens(v) * wr(_er(v)), lrc, hi)
        else:
            mass = (_quad(lambda v: dens(v) * wr(_er(v)), lrc, lrc + 30.0)
                    + _quad(lambda v: dens(v) * wr(_er(v)), lrc + 30.0, np.inf))
        r1 = min(cut, 2000.0 / k)
        near = _quad_tail(lambda r: special.j0(k * r) * g(r), rc, r1, scale=mass)[0]
        far = 0.0
        if r1 < cut:
            # J0(x) ~ sqrt(2/(pi x)) [cos(x - pi/4)(1 - 9/(128 x^2)) + sin(x - pi/4)/(8x)]
            amp = lambda r: g(r) * math.sqrt(2.0 / (math.pi * k * r))
            c1 = lambda r: amp(r) * (1 - 9.0 / (128.0 * (k * r) ** 2))
            s1 = lambda r: amp(r) / (8.0 * k * r)
            s2 = math.sqrt(0.5)
            ic = _quad_tail(c1, r1, cut, weight="cos", wvar=k, scale=mass)[0]
            is_ = _quad_tail(c1, r1, cut, weight="sin", wvar=k, scale=mass)[0]
            jc = _quad_tail(s1, r1, cut, weight="cos", wvar=k, scale=mass)[0]
            js = _quad_tail(s1, r1, cut, weight="sin", wvar=k, scale=mass)[0]
            # cos(x - pi/4) = (cos x + sin x)/sqrt2, sin(x - pi/4) = (sin x - cos x)/sqrt2
            far = s2 * (ic + is_) + s2 * (js - jc)
        re += mass - near - far
    return complex(re, 0.0)


def exponent_of_weight(profile: LevyProfile, weight: Callable, xi, case: str = "P3"):
    """Characteristic exponent of the jump density weight(z) J(z) at frequencies xi."""
    case = case.upper()
    if case not in CASES:
        raise ValueError(f"unknown case {case!r}")
    if profile.dimension == 1:
        xi = np.asarray(xi, dtype=float)
        out = np.vectorize(lambda s: _exponent_1d(profile, weight, float(s), case), otypes=[complex])(xi)
        return out[()] if out.ndim == 0 else out
    xi = np.asarray(xi, dtype=float)
    if xi.shape[-1:] != (2,):
        raise ValueError("d=2 frequencies need a trailing axis of length 2")
    flat = xi.reshape(-1, 2)
    out = np.array([_exponent_2d(profile, weight, p, case) for p in flat]).reshape(xi.shape[:-1])
    return out[()] if out.ndim == 0 else out


def frozen_exponent(profile: LevyProfile, coeff: CoefficientField, w, xi, case: str = "P3"):
    """psi_w(xi) for the operator with coefficient frozen at w."""
    return exponent_of_weight(profile, coeff.frozen_weight(w), xi, case)


# -- tabulated exponents --------------------------------------------------------

class ExponentTable:
    """Spline of log|psi| and arg psi in log|xi| for fast lattice evaluation."""

    def __init__(self, profile: LevyProfile, weight: Callable, case: str = "P3",
                 xi_range=(1e-6, 1e5), per_decade: int = 24,
                 check_every: int = 8):
        lo, hi = (math.log10(v) for v in xi_range)
        k = np.logspace(lo, hi, int(round((hi - lo) * per_decade)) + 1)
        if profile.dimension == 1:
            vals = exponent_of_weight(profile, weight, k, case)
        else:
            vals = exponent_of_weight(profile, weight, np.stack([k, 0 * k], -1), case)
        if np.any(vals.real <= 0):
            raise DivergentIntegralError("non-positive real part in exponent table")
        self.lk = np.log(k)
        self.mag = CubicSpline(self.lk, np.log(np.abs(vals)))
        self.arg = CubicSpline(self.lk, np.angle(vals))
        self.slope = (float(self.mag(self.lk[0], 1)), float(self.mag(self.lk[-1], 1)))
        self.dimension = profile.dimension
        self.real = bool(np.all(vals.imag == 0))
        # interpolation diagnostic on a sparse set of interval midpoints
        mid = np.exp(0.5 * (self.lk[1:] + self.lk[:-1]))[::check_every]
        if profile.dimension == 1:
            ref = exponent_of_weight(profile, weight, mid, case)
        else:
            ref = exponent_of_weight(profile, weight, np.stack([mid, 0 * mid], -1), case)
        self.interp_error = float(np.max(np.abs(self(mid) / ref - 1.0))) if check_every else 0.0

    def __call__(self, xi):
        xi = np.asarray(xi, dtype=float)
        k = np.abs(xi) if self.dimension == 1 else np.linalg.norm(xi, axis=-1)
        sgn = np.sign(xi) if self.dimension == 1 else np.ones_like(k)
        out = np.zeros(k.shape, dtype=complex)
        pos = k > 0
        lk = np.log(np.where(pos, k, 1.0))
        lo, hi = self.lk[0], self.lk[-1]
        c = np.clip(lk, lo, hi)
        m = self.mag(c) + np.where(lk < lo, self.slope[0] * (lk - lo), 0.0) \
            + np.where(lk > hi, self.slope[1] * (lk - hi), 0.0)
        a = self.arg(c)
        val = np.exp(m + 1j * sgn * a)
        out[pos] = val[pos]
        return out


@lru_cache(maxsize=64)
def exponent_table(profile: LevyProfile, weight: Callable, case: str = "P3") -> ExponentTable:
    return ExponentTable(profile, weight, case)


class AffineExponent:
    """psi_w(xi) = psi_base(xi) + theta(w) psi_mod(xi) with tabulated pieces."""

    def __init__(self, profile: LevyProfile, coeff: CoefficientField, case: str = "P3"):
        self.base = exponent_table(profile, coeff.base, case)
        self.mod = None if coeff.is_constant else exponent_table(profile, coeff.mod, case)
        self.coeff = coeff
        self.case = case

    def parts(self, xi):
        b = self.base(xi)
        m = np.zeros_like(b) if self.mod is None else self.mod(xi)
        return b, m

    def at_theta(self, theta: float, xi):
        b, m = self.parts(xi)
        return b + theta * m

    def __call__(self, w, xi):
        th = float(np.asarray(self.coeff.theta_at(w)).reshape(-1)[0])
        return self.at_theta(th, xi)


@lru_cache(maxsize=64)
def affine_exponent(profile: LevyProfile, coeff: CoefficientField, case: str = "P3") -> AffineExponent:
    return AffineExponent(profile, coeff, case.upper())


# -- envelope, drift, diagnostics ------------------------------------------------

class ComparabilityError(ArithmeticError):
    pass


def exponent_envelope(profile: LevyProfile, coeff: CoefficientField, r: float, w=0.0,
                      case: str = "P3", directions: int = 64, slack: float = 1e-6) -> float:
    """psi*(r) = sup_{|xi| <= r} Re psi_w(xi), with the comparability checks asserted."""
    d = profile.dimension
    radii = np.concatenate([np.geomspace(r * 1e-4, r, 64), [r]])
    if d == 1:
        pts = np.concatenate([radii, -radii])
    else:
        ang = np.linspace(0, 2 * np.pi, directions, endpoint=False)
        pts = (radii[:, None, None] * np.stack([np.cos(ang), np.sin(ang)], -1)[None]).reshape(-1, 2)
    wp = w if d == 1 else np.array([w, 0.0]) if np.ndim(w) == 0 else w
    th = float(np.asarray(coeff.theta_at(wp)).reshape(-1)[0])
    re = affine_exponent(profile, coeff, case).at_theta(th, pts).real
    star = float(re.max())
    # Re psi(xi) >= psi*(|xi|)/pi^2 along the sampled radii
    rad = np.abs(pts) if d == 1 else np.linalg.norm(pts, axis=-1)
    order = np.argsort(rad)
    running = np.maximum.accumulate(re[order])
    if np.any(re[order] < running / math.pi ** 2 * (1 - slack)):
        raise ComparabilityError("Re psi falls below psi*/pi^2")
    lam = profile.comparability
    hr = float(h_of(profile, 1.0 / r))
    lo = coeff.kappa0 / lam * hr / (8 * (1 + 2 * d))
    hi = 2 * coeff.kappa1 * lam * hr
    if not (lo * (1 - slack) <= star <= hi * (1 + slack)):
        raise ComparabilityError(f"psi*({r}) = {star} outside [{lo}, {hi}]")
    return star


def internal_drift(profile: LevyProfile, coeff: CoefficientField, w=0.0):
    """∫_{|z|<1} z kappa(w, z) J(z) dz."""
    d = profile.dimension
    weight = coeff.frozen_weight(w)
    if profile.symmetric and coeff.z_symmetric:
        return 0.0 if d == 1 else np.zeros(2)
    if d != 1:
        raise NotImplementedError("non-symmetric data are only provided in d=1")

    def f(v):
        r = math.exp(v)
        e = profile.lognu(v) + 2 * v
        a = float(weight(r) * _jratio(profile, r) - weight(-r) * _jratio(profile, -r))
        return math.exp(e) * a if e > -745 else 0.0

    return _logint(f, -np.inf, 0.0)


def growth_ratios(profile: LevyProfile, coeff: CoefficientField, case: str = "P3", w=0.0,
                  ks=range(4, 13)):
    """Re psi(2^k) / log 2^k along k; must increase for an admissible exponent."""
    xi = np.array([2.0 ** k for k in ks])
    if profile.dimension == 2:
        xi = np.stack([xi, 0 * xi], -1)
    re = frozen_exponent(profile, coeff, w, xi, case).real
    return re / (np.array(list(ks)) * math.log(2.0))
