"""Property suite: each check returns a record with a fitted constant, a residual and a tolerance.

A record passes exactly when its residual is at most its tolerance. Checks
that fit a constant (whose true value is not explicit) use the relative
change of the constant across one grid refinement as the residual and pass
when it stays within ``stability`` (15% by default).
"""

from __future__ import annotations

import hashlib
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from itertools import combinations

import numpy as np
from scipy import integrate, special

from . import measure
from .frozen import GridError, KernelField, SpaceTimeGrid
from .measure import LevyProfile, OMEGA, bound_rho, h_inverse, rho_radial
from .operator import _torus_distance, pde_residual
from .parametrix import HeatKernelField, ParametrixEngine
from .symbol import CoefficientField, affine_exponent

DEFAULT_SEED = 0x5EED
STABILITY = 0.15
# a lower constant this far below the upper one is treated as a collapse to zero
LOWER_FLOOR = 1e-2


@dataclass
class Check:
    name: str
    anchor: str
    constant: float | None
    residual: float
    tol: float
    grid: dict = field(default_factory=dict)
    detail: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(self.residual <= self.tol)

    def record(self) -> dict:
        return {"check": self.name, "anchor": self.anchor, "constant": _num(self.constant),
                "residual": _num(self.residual, clamp=True), "tol": _num(self.tol), "pass": self.passed}


def _num(v, clamp: bool = False):
    if v is None:
        return None
    v = float(v)
    if math.isnan(v):
        return sys.float_info.max if clamp else None
    if math.isinf(v):
        return math.copysign(sys.float_info.max, v) if clamp else None
    return v


def _plain(obj):
    """JSON-ready copy with numpy scalars and arrays converted."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (float, np.floating)):
        return _num(obj, clamp=True)
    return obj


def _rel_change(a: float, b: float) -> float:
    if not (np.isfinite(a) and np.isfinite(b)) or a <= 0 or b <= 0:
        return math.inf
    return abs(b / a - 1.0)


def _grid_info(grid: SpaceTimeGrid) -> dict:
    return {"L": grid.L, "n": grid.n, "geometry": grid.geometry, "dimension": grid.dimension,
            "t_first": float(grid.times[0]), "t_last": float(grid.times[-1]), "reports": len(grid.times)}


# -- kernel views -------------------------------------------------------------------

def _view(kernel):
    """(grid, values (nt, n), distance |y - x| per lattice point) for either kernel type."""
    if isinstance(kernel, HeatKernelField):
        g = kernel.grid
        return g, kernel.values, _torus_distance(g, g.x, kernel.y)
    if isinstance(kernel, KernelField):
        g = kernel.grid
        return g, kernel.values, np.abs(g.x)
    raise TypeError("expected a HeatKernelField or a KernelField")


def _pick_times(times, fractions=(0.25, 0.5, 1.0)) -> list:
    times = np.asarray(times)
    out = []
    for f in fractions:
        k = int(np.argmin(np.abs(times - f * times[-1])))
        if k not in out:
            out.append(k)
    return out


# -- mass, Chapman-Kolmogorov, sign ------------------------------------------------------

def check_mass(kernel, mass_tol: float = 5e-3, count_outside: bool = False) -> Check:
    """max over t and x of |∫ p(t, x, y) dy - 1|.

    The integral is the lattice sum over the box. With ``count_outside`` a
    line-geometry frozen kernel is credited with the mass its construction
    found outside the box, so only the numerical error remains.
    """
    g = kernel.grid
    m = np.asarray(kernel.mass() if isinstance(kernel, KernelField) else kernel.row_mass(), dtype=float)
    leaked = 1.0 - m
    name = "mass"
    if count_outside and isinstance(kernel, KernelField) and "outside_mass" in kernel.meta:
        m = m + np.asarray(kernel.meta["outside_mass"], dtype=float)
        name = "mass-with-tail"
    res = float(np.max(np.abs(m - 1.0)))
    return Check(name, "conservativeness", None, res, mass_tol, _grid_info(g),
                 {"leaked_mass": float(np.max(leaked))})


def _offset_rows(kernel: HeatKernelField) -> np.ndarray:
    """f_t(u) on offset indices from p(t, x_j, y) = f_t(y - x_j) (constant coefficient)."""
    g = kernel.grid
    n = g.n
    j = np.arange(n)
    idx = (g.index_of(kernel.y) - j + n // 2) % n
    out = np.empty_like(kernel.values)
    out[:, idx] = kernel.values
    return out


def check_chapman_kolmogorov(kernel, s: float, t: float, chk_tol: float = 1e-3) -> Check:
    """sup_x |∫ p(s, x, z) p(t, z, y) dz - p(s + t, x, y)| relative to the peak of p(s + t)."""
    g, vals, _ = _view(kernel)
    i_s, i_t, i_st = g.time_index(s), g.time_index(t), g.time_index(s + t)
    if isinstance(kernel, HeatKernelField) and kernel.engine is not None:
        both = kernel.engine.apply(vals[i_t])
        conv = both[i_s]
        target = vals[i_st]
    else:
        if g.geometry != "torus":
            raise GridError("convolution check without an engine needs the torus geometry")
        rows = _offset_rows(kernel) if isinstance(kernel, HeatKernelField) else vals
        c = np.fft.irfft(np.fft.rfft(rows[i_s]) * np.fft.rfft(rows[i_t]), g.n) * g.dx
        conv_off = np.roll(c, -(g.n // 2))
        target_off = rows[i_st]
        conv, target = conv_off, target_off
    res = float(np.max(np.abs(conv - target)) / np.max(np.abs(target)))
    return Check(f"chapman-kolmogorov({s:g},{t:g})", "Chapman-Kolmogorov equation", None, res, chk_tol,
                 _grid_info(g))


def check_nonnegativity(kernel, neg_tol: float = 1e-9) -> Check:
    g, vals, _ = _view(kernel)
    mn = float(np.min(vals))
    return Check("nonnegativity", "non-negativity", mn, max(0.0, -mn), neg_tol, _grid_info(g))


# -- two-sided bounds ---------------------------------------------------------------------

def lower_expression(profile: LevyProfile, t: float, r) -> np.ndarray:
    """[h^-1(1/t)]^-d ∧ t nu(r)."""
    d = profile.dimension
    top = float(h_inverse(profile, 1.0 / t)) ** (-d)
    r = np.asarray(r, dtype=float)
    with np.errstate(divide="ignore"):
        nu = np.where(r > 0, profile.nu(np.where(r > 0, r, 1.0)), np.inf)
    return np.minimum(top, t * nu)


def bound_constants(kernel, profile: LevyProfile, T0: float = 0.5) -> dict:
    g, vals, dist = _view(kernel)
    up, low, low2 = 0.0, math.inf, math.inf
    for k, t in enumerate(g.times):
        row = vals[k]
        up = max(up, float(np.max(row / bound_rho(profile, t, dist))))
        if t <= T0 * (1 + 1e-12):
            low = min(low, float(np.min(row / lower_expression(profile, t, dist))))
        if t <= 2 * T0 * (1 + 1e-12):
            low2 = min(low2, float(np.min(row / lower_expression(profile, t, dist))))
    return {"c_upper": up, "c_lower": low, "c_lower_2T0": low2, "T0": T0}


def check_two_sided_bounds(coarse, fine, profile: LevyProfile, T0: float = 0.5,
                           stability: float = STABILITY) -> Check:
    """Fit c_upper = sup p/rho_t and c_lower = inf p/(lower form) on t <= T0 for two grids."""
    a = bound_constants(coarse, profile, T0)
    b = bound_constants(fine, profile, T0)
    res = max(_rel_change(a["c_upper"], b["c_upper"]), _rel_change(a["c_lower"], b["c_lower"]))
    for c in (a, b):
        if not c["c_lower"] >= LOWER_FLOOR * c["c_upper"]:
            res = math.inf
    detail = {"coarse": a, "fine": b, "lower_floor_ratio": LOWER_FLOOR}
    return Check("two-sided-bounds", "upper estimate and lower bound", b["c_upper"], res, stability,
                 {"coarse": _grid_info(_view(coarse)[0]), "fine": _grid_info(_view(fine)[0])}, detail)


def shuffled(kernel, seed: int = DEFAULT_SEED):
    """Copy of the kernel with the values of each time row randomly permuted in x."""
    rng = np.random.default_rng(seed)
    g, vals, _ = _view(kernel)
    new = np.array([rng.permutation(r) for r in vals])
    return replace(kernel, values=new)


# -- Hölder moduli and gradient -----------------------------------------------------------------

def _x_pairs(n: int, rng, random_pairs: int):
    i = np.arange(n)
    pairs = [(i, (i + (1 << k)) % n) for k in range(int(math.log2(n)))]
    a = rng.integers(0, n, random_pairs)
    b = rng.integers(0, n, random_pairs)
    pairs.append((a, b))
    return np.concatenate([p[0] for p in pairs]), np.concatenate([p[1] for p in pairs])


def holder_x_constant(kernel, profile: LevyProfile, gamma: float, seed: int = DEFAULT_SEED,
                      random_pairs: int = 2000, fractions=(0.25, 0.5, 1.0)) -> float:
    g, vals, dist = _view(kernel)
    rng = np.random.default_rng(seed)
    a, b = _x_pairs(g.n, rng, random_pairs)
    keep = a != b
    a, b = a[keep], b[keep]
    sep = _torus_distance(g, g.x[a], g.x[b])
    best = 0.0
    for k in _pick_times(g.times, fractions):
        t = float(g.times[k])
        H = float(h_inverse(profile, 1.0 / t))
        rho = bound_rho(profile, t, dist)
        den = np.minimum(sep ** gamma, 1.0) * H ** (-gamma) * (rho[a] + rho[b])
        best = max(best, float(np.max(np.abs(vals[k, a] - vals[k, b]) / den)))
    return best


def holder_y_constant(kernels, profile: LevyProfile, gamma: float,
                      fractions=(0.25, 0.5, 1.0)) -> float:
    g = kernels[0].grid
    best = 0.0
    for ka, kb in combinations(kernels, 2):
        sep = float(_torus_distance(g, ka.y, kb.y))
        da = _torus_distance(g, g.x, ka.y)
        db = _torus_distance(g, g.x, kb.y)
        for k in _pick_times(g.times, fractions):
            t = float(g.times[k])
            H = float(h_inverse(profile, 1.0 / t))
            den = min(sep ** gamma, 1.0) * H ** (-gamma) * (bound_rho(profile, t, da) + bound_rho(profile, t, db))
            best = max(best, float(np.max(np.abs(ka.values[k] - kb.values[k]) / den)))
    return best


def check_holder(coarse, fine, profile: LevyProfile, gammas, variable: str = "x",
                 seed: int = DEFAULT_SEED, stability: float = STABILITY) -> Check:
    """Fitted Hölder constants at three times on two grids, one per exponent.

    For ``variable="y"`` the arguments are lists of kernels sharing a grid with
    different targets.
    """
    consts = {}
    res = 0.0
    for gmm in gammas:
        if variable == "x":
            ca = holder_x_constant(coarse, profile, gmm, seed)
            cb = holder_x_constant(fine, profile, gmm, seed)
        else:
            ca = holder_y_constant(coarse, profile, gmm)
            cb = holder_y_constant(fine, profile, gmm)
        consts[f"{gmm:g}"] = {"coarse": ca, "fine": cb}
        res = max(res, _rel_change(ca, cb))
    gc = (coarse if variable == "x" else coarse[0]).grid
    gf = (fine if variable == "x" else fine[0]).grid
    top = max(v["fine"] for v in consts.values())
    return Check(f"holder-{variable}", f"Hölder continuity in {variable}", top, res, stability,
                 {"coarse": _grid_info(gc), "fine": _grid_info(gf)}, {"constants": consts})


def discontinuous_surrogate(kernel: HeatKernelField, offset: float = 0.5, height: float = 0.5):
    """Kernel plus a step of ``height`` times its peak at x = y + offset."""
    g = kernel.grid
    step = (g.x >= kernel.y + offset).astype(float)
    new = kernel.values + height * kernel.values.max(axis=1, keepdims=True) * step[None, :]
    return replace(kernel, values=new)


def gradient_constant(kernel, profile: LevyProfile) -> float:
    g, vals, dist = _view(kernel)
    if g.geometry != "torus":
        raise GridError("the spectral gradient needs the torus geometry")
    dpx = np.fft.irfft(1j * g.xi * np.fft.rfft(vals, axis=1), g.n, axis=1)
    best = 0.0
    for k, t in enumerate(g.times):
        H = float(h_inverse(profile, 1.0 / t))
        best = max(best, float(np.max(np.abs(dpx[k]) * H / bound_rho(profile, t, dist))))
    return best


def check_gradient(coarse, fine, profile: LevyProfile, stability: float = STABILITY) -> Check:
    ca, cb = gradient_constant(coarse, profile), gradient_constant(fine, profile)
    return Check("gradient", "gradient estimate", cb, _rel_change(ca, cb), stability,
                 {"coarse": _grid_info(_view(coarse)[0]), "fine": _grid_info(_view(fine)[0])},
                 {"coarse": ca, "fine": cb})


# -- equation residuals and the oracle ------------------------------------------------------------

def check_integral_equation(kernel: HeatKernelField, t_list, tol: float = 5e-6) -> Check:
    if kernel.engine is None or kernel.table is None:
        return Check("integral-equation", "Volterra equation for q", None, 0.0, tol, _grid_info(kernel.grid),
                     {"note": "constant coefficient: q vanishes"})
    res = kernel.engine.integral_equation_residual(kernel.table, kernel.y, t_list)
    return Check("integral-equation", "Volterra equation for q", None, res, tol, _grid_info(kernel.grid),
                 {"times": list(t_list), "levels": kernel.table.n_levels,
                  "truncation_bound": kernel.table.truncation_bound})


def check_pde(profile: LevyProfile, coeff, kernel: HeatKernelField, epsilon: float = 0.01,
              tol: float = 5e-2, case: str | None = None) -> Check:
    """max |∂_t p - L^{kappa,eps} p| / (t^-1 rho_t) at the interior report times."""
    times, rows = pde_residual(profile, coeff, kernel, epsilon, case or kernel.case)
    res = float(np.max(np.abs(rows)))
    return Check("pde-residual", "backward equation", None, res, tol, _grid_info(kernel.grid),
                 {"epsilon": epsilon, "times": len(times)})


def check_mol(profile: LevyProfile, coeff, kernel: HeatKernelField, t0: float = 0.5, dt: float = 0.25,
              n_mol: int = 1024, tol: float = 2e-2, case: str | None = None) -> Check:
    """Method-of-lines evolution of p(t0, ., y) over dt against p(t0 + dt, ., y)."""
    from .oracle import mol_evolve
    g = kernel.grid
    if g.n % n_mol:
        raise GridError("the oracle resolution must divide the kernel resolution")
    stride = g.n // n_mol
    small = SpaceTimeGrid(g.L, n_mol, np.array([dt]))
    start = kernel.values[g.time_index(t0), ::stride]
    want = kernel.values[g.time_index(t0 + dt), ::stride]
    got, info = mol_evolve(profile, coeff, start, dt, small, case or kernel.case, return_info=True)
    res = float(np.max(np.abs(got - want)) / np.max(np.abs(want)))
    return Check("oracle-mol", "backward equation (independent solver)", None, res, tol,
                 _grid_info(small), {"steps": info["steps"], "t0": t0, "dt": dt})


# -- semigroup -----------------------------------------------------------------------------

def semigroup_operator(profile: LevyProfile, coeff: CoefficientField, grid: SpaceTimeGrid,
                       case: str = "P3", **engine_kw):
    """f -> P_t f at the report times of ``grid`` (array of shape (times, n))."""
    if coeff.is_constant:
        th = float(np.asarray(coeff.theta_at(0.0)).reshape(-1)[0])
        psi = np.asarray(affine_exponent(profile, coeff, case.upper()).at_theta(th, grid.xi), complex)
        psi[0] = 0.0

        def apply(f):
            F = np.fft.rfft(np.asarray(f, dtype=float))
            return np.array([np.fft.irfft(np.exp(-t * psi) * F, grid.n) for t in grid.times])
        return apply
    eng = ParametrixEngine(profile, coeff, grid, case, **engine_kw)
    return eng.apply


def default_test_functions(grid: SpaceTimeGrid) -> dict:
    x = grid.x
    w = min(1.0, grid.L / 4)
    s = np.clip(np.abs(x) / w, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        bump = np.where(s < 1.0, np.exp(1.0 - 1.0 / np.maximum(1.0 - s * s, 1e-300)), 0.0)
    return {"constant": np.ones_like(x), "bump": bump, "signed": bump * np.sin(3.0 * x / w)}


def check_semigroup(apply, grid: SpaceTimeGrid, test_functions: dict | None = None,
                    mass_tol: float = 5e-3, approach_tol: float = 1e-2, neg_tol: float = 1e-9) -> list:
    fs = default_test_functions(grid) if test_functions is None else test_functions
    gi = _grid_info(grid)
    out = []
    P = {k: apply(f) for k, f in fs.items()}
    if "constant" in P:
        out.append(Check("semigroup-constant", "conservative semigroup", None,
                         float(np.max(np.abs(P["constant"] - 1.0))), mass_tol, gi))
    norms = []
    for k, f in fs.items():
        if k == "constant":
            continue
        norms.append(float(np.max(np.abs(P[k]))) / float(np.max(np.abs(f))))
    out.append(Check("semigroup-contraction", "contraction semigroup", max(norms),
                     max(0.0, max(norms) - 1.0), mass_tol, gi))
    pos = [float(np.min(P[k])) for k, f in fs.items() if np.all(f >= 0)]
    out.append(Check("semigroup-positivity", "positive semigroup", min(pos), max(0.0, -min(pos)), neg_tol, gi))
    f = fs["bump"]
    gaps = np.array([float(np.max(np.abs(r - f))) for r in P["bump"]])
    monotone = bool(np.all(np.diff(gaps) >= -1e-12 * max(1.0, gaps.max())))
    res = float(gaps[0]) if monotone else math.inf
    out.append(Check("semigroup-strong-continuity", "strong continuity at t = 0", None, res, approach_tol, gi,
                     {"t_min": float(grid.times[0]), "gaps": gaps.tolist(), "monotone": monotone}))
    return out


# -- bound-function inequalities ----------------------------------------------------------------

def bound_function_integral(profile: LevyProfile, t: float, decades: float = 200.0,
                            quad_tol: float = 1e-6) -> tuple[float, float]:
    """(quadrature, closed form) of ∫ rho_t(x) dx.

    The quadrature integrates t K(r)/r over log r from the crossover radius
    for ``decades`` e-folds and adds the remainder h(R)/2; the closed form is
    omega r0^d / (d H^d) + omega t h(r0) / 2.
    """
    d = profile.dimension
    om = OMEGA[d]
    r0 = measure.rho_crossover(profile, t)
    H = float(h_inverse(profile, 1.0 / t))
    core = om * r0 ** d / (d * H ** d)
    a = math.log(r0)
    f = lambda v: float(measure.K_of(profile, math.exp(v)))
    step = 10.0
    tail = 0.0
    for k in range(int(decades / step)):
        tail += integrate.quad(f, a + k * step, a + (k + 1) * step, epsabs=0.0,
                               epsrel=min(quad_tol, 1e-10), limit=200)[0]
    tail += float(measure.h_of(profile, math.exp(a + decades))) / 2.0
    quad = core + om * t * tail
    closed = core + om * t * float(measure.h_of(profile, r0)) / 2.0
    return quad, closed


def check_bound_function_mass(profile: LevyProfile, times=(0.1, 1.0, 10.0), quad_tol: float = 1e-6) -> Check:
    """omega/2 <= ∫ rho_t <= (omega/2)(1 + 2/d) with the exact constants."""
    d = profile.dimension
    lo, hi = OMEGA[d] / 2, OMEGA[d] / 2 * (1 + 2 / d)
    res = 0.0
    vals = {}
    for t in times:
        q, c = bound_function_integral(profile, t, quad_tol=quad_tol)
        vals[f"{t:g}"] = q
        outside = max(0.0, lo - q, q - hi) / lo
        res = max(res, outside, abs(q - c) / c)
    return Check(f"bound-function-mass[{profile.name},d={d}]", "integral of the bound function", None, res,
                 quad_tol, {}, {"integrals": vals, "interval": [lo, hi]})


def _time_horizon(profile: LevyProfile, cert) -> float:
    return min(1.0 / float(measure.h_of(profile, cert.theta_h)), 10.0)


def _draw_points(rng, d: int, size: int) -> np.ndarray:
    r = 10.0 ** rng.uniform(-3, 2, size)
    if d == 1:
        return r * rng.choice([-1.0, 1.0], size)
    ang = rng.uniform(0, 2 * np.pi, size)
    return np.stack([r * np.cos(ang), r * np.sin(ang)], -1)


def _norm(profile, x):
    return np.abs(x) if profile.dimension == 1 else np.linalg.norm(x, axis=-1)


def three_g_ratios(profile: LevyProfile, cert, rng, draws: int, time_nodes: int = 48) -> np.ndarray:
    """rho_s(x) ∧ rho_t(y) / rho_{s+t}(x+y) over random draws with s + t below the horizon."""
    T = _time_horizon(profile, cert)
    grid_t = np.geomspace(1e-3, T / 2, time_nodes)
    i = rng.integers(0, time_nodes, draws)
    j = rng.integers(0, time_nodes, draws)
    x = _draw_points(rng, profile.dimension, draws)
    y = _draw_points(rng, profile.dimension, draws)
    out = np.empty(draws)
    s, t = grid_t[i], grid_t[j]
    for k in range(draws):
        lhs = min(float(bound_rho(profile, s[k], x[k])), float(bound_rho(profile, t[k], y[k])))
        out[k] = lhs / float(bound_rho(profile, s[k] + t[k], x[k] + y[k]))
    return out


def check_three_g(profile: LevyProfile, cert=None, seed: int = DEFAULT_SEED, draws: int = 10_000,
                  slack: float = STABILITY) -> Check:
    """Fit c on one batch of draws, then count violations of c (1 + slack) on a fresh batch."""
    cert = cert or measure.estimate_scaling(profile)
    rng = np.random.default_rng([seed, 3])
    fit = three_g_ratios(profile, cert, rng, draws)
    c = float(fit.max())
    fresh = three_g_ratios(profile, cert, rng, draws)
    viol = int(np.sum(fresh > c * (1 + slack)))
    return Check(f"3g[{profile.name}]", "3G inequality", c, float(viol), 0.0, {},
                 {"draws": draws, "fresh_max": float(fresh.max()), "slack": slack})


class InverseScale:
    """u -> h^-1(1/u) by a log-log spline of h over the radii needed for u in [u_lo, u_hi]."""

    def __init__(self, profile: LevyProfile, u_lo: float, u_hi: float, per_decade: int = 12):
        from scipy.interpolate import CubicSpline
        r_lo = float(h_inverse(profile, 1.0 / u_lo)) / 2
        r_hi = float(h_inverse(profile, 1.0 / u_hi)) * 2
        r = np.logspace(math.log10(r_lo), math.log10(r_hi),
                        int(per_decade * math.log10(r_hi / r_lo)) + 2)
        lh = np.log(np.asarray(measure.h_of(profile, r), dtype=float))
        # h decreases, so -log h is an increasing abscissa
        self._spl = CubicSpline(-lh, np.log(r))
        self.u_lo, self.u_hi = u_lo, u_hi

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        if np.any(u < self.u_lo * (1 - 1e-12)) or np.any(u > self.u_hi * (1 + 1e-12)):
            raise ValueError("argument outside the tabulated range")
        return np.exp(self._spl(np.log(u)))


def time_convolution_sides(profile: LevyProfile, t: float, eta: float, theta: float, beta: float,
                           gamma: float, quad_tol: float = 1e-6, H=None) -> tuple[float, float]:
    H = H or InverseScale(profile, 1e-62 * t, t)
    f = lambda u, v: u ** -eta * float(H(u)) ** gamma * v ** -theta * float(H(v)) ** beta
    # each half on u = (t/2) e^{-w}, which turns the endpoint power laws into exponential decay
    half = 0.5 * t
    # past w = 140 the remainder is below e^{-140 (1 - eta)}, negligible for eta, theta <= 0.8
    wmax = 140.0
    kw = dict(epsabs=0.0, epsrel=quad_tol * 1e-2, limit=400, points=[5.0, 20.0, 80.0])
    left = integrate.quad(lambda w: half * math.exp(-w) * f(half * math.exp(-w), t - half * math.exp(-w)),
                          0.0, wmax, **kw)[0]
    right = integrate.quad(lambda w: half * math.exp(-w) * f(t - half * math.exp(-w), half * math.exp(-w)),
                           0.0, wmax, **kw)[0]
    rhs = special.beta(beta / 2 + 1 - theta, gamma / 2 + 1 - eta) * t ** (1 - eta - theta) \
        * float(h_inverse(profile, 1.0 / t)) ** (gamma + beta)
    return left + right, rhs


def check_time_convolution(profile: LevyProfile, seed: int = DEFAULT_SEED, draws: int = 10,
                           quad_tol: float = 1e-6) -> Check:
    """∫_0^t u^-eta H(u)^gamma (t-u)^-theta H(t-u)^beta du <= B(...) t^{1-eta-theta} H(t)^{gamma+beta}."""
    rng = np.random.default_rng([seed, 17])
    H = InverseScale(profile, 1e-64, 10.0)
    worst = 0.0
    rows = []
    for _ in range(draws):
        t = float(10.0 ** rng.uniform(-2, 1))
        eta, theta = rng.uniform(0, 0.8, 2)
        beta, gamma = rng.uniform(0, 2, 2)
        lhs, rhs = time_convolution_sides(profile, t, eta, theta, beta, gamma, quad_tol, H)
        worst = max(worst, lhs / rhs)
        rows.append([t, eta, theta, beta, gamma, lhs / rhs])
    return Check(f"time-convolution[{profile.name}]", "time convolution inequality", worst,
                 max(0.0, worst - 1.0), quad_tol, {}, {"draws": rows})


def weighted_mass(profile: LevyProfile, t: float, beta: float, quad_tol: float = 1e-6) -> float:
    """∫ (|x|^beta ∧ 1) rho_t(x) dx by radial quadrature on log r."""
    d = profile.dimension
    r0 = measure.rho_crossover(profile, t)
    H = float(h_inverse(profile, 1.0 / t))
    top = H ** (-d)

    def f(v):
        r = math.exp(v)
        rho = top if r < r0 else t * float(measure.K_of(profile, r)) / r ** d
        return min(r ** beta, 1.0) * rho * r ** d
    pts = sorted({math.log(r0), 0.0})
    lo, hi = math.log(r0) - 60.0, math.log(max(r0, 1.0)) + 200.0
    edges = sorted(set([lo] + [p for p in pts if lo < p < hi] + list(np.arange(lo, hi, 10.0)) + [hi]))
    total = sum(integrate.quad(f, a, b, epsabs=0.0, epsrel=quad_tol * 1e-2, limit=200)[0]
                for a, b in zip(edges[:-1], edges[1:]))
    total += t * float(measure.h_of(profile, math.exp(hi))) / 2.0     # remainder beyond the last panel
    return OMEGA[d] * total


def check_weighted_mass(profile: LevyProfile, cert=None, seed: int = DEFAULT_SEED, draws: int = 10,
                        quad_tol: float = 1e-6) -> Check:
    """∫ (|x|^beta ∧ 1) rho_t <= 2 omega C_h (1 + theta_h^-beta)/(alpha_h - beta) H^beta."""
    cert = cert or measure.estimate_scaling(profile)
    rng = np.random.default_rng([seed, 23])
    T = 1.0 / float(measure.h_of(profile, cert.theta_h))
    worst = 0.0
    rows = []
    om = OMEGA[profile.dimension]
    for _ in range(draws):
        beta = float(rng.uniform(0, 0.95 * cert.alpha_h))
        t = float(np.exp(rng.uniform(math.log(1e-3 * T), math.log(0.99 * T))))
        lhs = weighted_mass(profile, t, beta, quad_tol)
        const = 2 * om * cert.C_h * (1 + cert.theta_h ** (-beta)) / (cert.alpha_h - beta)
        rhs = const * float(h_inverse(profile, 1.0 / t)) ** beta
        worst = max(worst, lhs / rhs)
        rows.append([t, beta, lhs / rhs])
    return Check(f"weighted-mass[{profile.name}]", "weighted mass of the bound function", worst,
                 max(0.0, worst - 1.0), quad_tol, {}, {"draws": rows})


# convolution inequalities: both sides by composite Gauss-Legendre on panels refined at the peaks

_GL = np.polynomial.legendre.leggauss(8)


def _line_nodes(centers, scale: float, far: float = 1e8):
    """Nodes and weights on the real line, panels graded geometrically toward each centre."""
    offs = np.geomspace(scale * 1e-4, far, 180)
    edges = np.unique(np.concatenate([c + s * offs for c in centers for s in (-1, 1)] + [np.asarray(centers)]))
    a, b = edges[:-1], edges[1:]
    x = 0.5 * (a + b)[:, None] + 0.5 * (b - a)[:, None] * _GL[0][None, :]
    w = 0.5 * (b - a)[:, None] * _GL[1][None, :]
    return x.ravel(), w.ravel()


def _rho1(profile, t, x):
    return rho_radial(profile, t, np.abs(x))


def _err(profile, gamma, beta, t, x):
    H = float(h_inverse(profile, 1.0 / t))
    return H ** gamma * np.minimum(np.abs(x) ** beta, 1.0) / t * _rho1(profile, t, x)


def space_integral_ratio(profile, t: float, beta: float) -> float:
    x, w = _line_nodes([0.0], float(h_inverse(profile, 1.0 / t)))
    lhs = float(np.sum(w * _err(profile, 0.0, beta, t, x)))
    return lhs / (float(h_inverse(profile, 1.0 / t)) ** beta / t)


def space_convolution_ratio(profile, t: float, s: float, x0: float, b1: float, b2: float, beta0: float) -> float:
    H = lambda u: float(h_inverse(profile, 1.0 / u))
    z, w = _line_nodes([0.0, x0], min(H(s), H(t - s)))
    lhs = float(np.sum(w * _err(profile, 0.0, b1, t - s, x0 - z) * _err(profile, 0.0, b2, s, z)))
    n1 = n2 = min(b1 + b2, beta0)
    m1, m2 = b1, b2
    e00 = float(_err(profile, 0.0, 0.0, t, x0))
    rhs = ((t - s) ** -1 * H(t - s) ** n1 + s ** -1 * H(s) ** n2) * e00 \
        + (t - s) ** -1 * H(t - s) ** m1 * float(_err(profile, 0.0, b2, t, x0)) \
        + s ** -1 * H(s) ** m2 * float(_err(profile, 0.0, b1, t, x0))
    return lhs / rhs


def space_time_convolution_ratio(profile, t: float, x0: float, b1: float, b2: float, beta0: float,
                                 theta: float = 0.5, eta: float = 0.5, s_nodes: int = 24) -> float:
    """Both sides of the space-time convolution bound with gamma_1 = gamma_2 = 0."""
    H = lambda u: float(h_inverse(profile, 1.0 / u))
    # s in (0, t): Gauss-Legendre on panels graded toward both endpoints
    g = np.geomspace(1e-6, 0.5, s_nodes // 2)
    edges = np.unique(np.concatenate([[0.0], g * t, t - g * t, [t]]))
    a, b = edges[:-1], edges[1:]
    ss = (0.5 * (a + b)[:, None] + 0.5 * (b - a)[:, None] * _GL[0][None, :]).ravel()
    ws = (0.5 * (b - a)[:, None] * _GL[1][None, :]).ravel()
    lhs = 0.0
    for s, wsk in zip(ss, ws):
        z, w = _line_nodes([0.0, x0], min(H(s), H(t - s)))
        inner = float(np.sum(w * _err(profile, 0.0, b1, t - s, x0 - z) * _err(profile, 0.0, b2, s, z)))
        lhs += wsk * (t - s) ** (1 - theta) * s ** (1 - eta) * inner
    n1 = n2 = min(b1 + b2, beta0)
    m1, m2 = b1, b2
    rhs = t ** (2 - eta - theta) * (float(_err(profile, n1, 0.0, t, x0)) + float(_err(profile, n2, 0.0, t, x0))
                                    + float(_err(profile, m1, b2, t, x0)) + float(_err(profile, m2, b1, t, x0)))
    return lhs / rhs


def check_convolutions(profile: LevyProfile, cert=None, seed: int = DEFAULT_SEED, draws: int = 40,
                       st_draws: int = 4, stability: float = STABILITY) -> list:
    """Fitted constants of the three convolution bounds.

    The single-integral bound is fitted on a (t, beta) lattice and again on the
    lattice refined once in each direction. The two convolution bounds are
    fitted on ``k`` random draws and on ``2k`` draws containing them.
    """
    if profile.dimension != 1:
        raise ValueError("the convolution checks are provided for d=1")
    cert = cert or measure.estimate_scaling(profile)
    beta0 = min(1.0, 0.9 * cert.alpha_h)
    T = min(1.0, _time_horizon(profile, cert))
    out = []

    def lattice(m):
        ts = np.geomspace(1e-3 * T, T, 8 * m + 1)
        bs = np.linspace(0.0, beta0, 4 * m + 1)
        return max(space_integral_ratio(profile, float(t), float(b)) for t in ts for b in bs)

    ca, cb = lattice(1), lattice(2)
    out.append(Check(f"space-integral[{profile.name}]", "integral of the error function", cb,
                     _rel_change(ca, cb), stability, {}, {"coarse_lattice": ca, "fine_lattice": cb}))

    def sample(kind, k):
        rng = np.random.default_rng([seed, 31, ord(kind)])
        vals = []
        for _ in range(k):
            t = float(np.exp(rng.uniform(math.log(1e-3 * T), math.log(T))))
            b1, b2 = rng.uniform(0, beta0, 2)
            x0 = float(rng.choice([-1, 1]) * 10.0 ** rng.uniform(-3, 1.5))
            s = float(t * rng.uniform(0.02, 0.98))
            if kind == "b":
                vals.append(space_convolution_ratio(profile, t, s, x0, b1, b2, beta0))
            else:
                vals.append(space_time_convolution_ratio(profile, t, x0, b1, b2, beta0))
        return np.array(vals)

    for kind, k, nm, anchor in (("b", draws, "space-convolution", "space convolution of error functions"),
                                ("c", st_draws, "space-time-convolution",
                                 "space-time convolution of error functions")):
        v = sample(kind, 2 * k)
        ca, cb = float(v[:k].max()), float(v.max())
        out.append(Check(f"{nm}[{profile.name}]", anchor, cb, _rel_change(ca, cb), stability, {},
                         {"draws": k, "doubled_draws": 2 * k, "fit": ca, "fit_doubled": cb}))
    return out


def check_appendix_inequalities(profile: LevyProfile, cert=None, seed: int = DEFAULT_SEED,
                                quad_tol: float = 1e-6, draws: int = 10_000,
                                convolutions: bool = True) -> list:
    cert = cert or measure.estimate_scaling(profile)
    out = [check_bound_function_mass(profile, quad_tol=quad_tol),
           check_three_g(profile, cert, seed, draws),
           check_time_convolution(profile, seed, quad_tol=quad_tol),
           check_weighted_mass(profile, cert, seed, quad_tol=quad_tol)]
    if convolutions and profile.dimension == 1:
        out.extend(check_convolutions(profile, cert, seed))
    return out


# -- negative controls -------------------------------------------------------------------------------

def negative_control(inner: Check) -> Check:
    """Passes exactly when the wrapped check fails: residual tol_inner / residual_inner against 1."""
    r = inner.residual
    ratio = 0.0 if not np.isfinite(r) else (math.inf if r <= 0 else inner.tol / r)
    return Check(f"negative-control:{inner.name}", inner.anchor, inner.constant, ratio, 1.0, inner.grid,
                 {"inner_residual": r, "inner_tol": inner.tol, "inner_pass": inner.passed})


# -- report ---------------------------------------------------------------------------------------

def config_hash(config) -> str:
    if config is None:
        text = ""
    elif isinstance(config, str):
        text = config
    else:
        text = json.dumps(_plain(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


def run_checks(jobs, threads: int = 1) -> list:
    """Run callables (each returning a Check or a list of them); results keep submission order."""
    def flat(r):
        return r if isinstance(r, list) else [r]
    if threads <= 1:
        return [c for j in jobs for c in flat(j())]
    with ThreadPoolExecutor(threads) as pool:
        futures = [pool.submit(j) for j in jobs]
        return [c for f in futures for c in flat(f.result())]


def build_report(checks, config=None, seed: int = DEFAULT_SEED, parameters: dict | None = None) -> dict:
    if not checks:
        raise ValueError("a report needs at least one check")
    records = [c.record() for c in checks]
    passed = sum(r["pass"] for r in records)
    return {
        "environment": {"config_hash": config_hash(config), "seed": int(seed)},
        "summary": {"pass": passed, "fail": len(records) - passed},
        "parameters": _plain(parameters or {}),
        "checks": records,
        "provenance": {c.name: _plain({"grid": c.grid, "detail": c.detail}) for c in checks},
    }


def emit_report(checks, config=None, seed: int = DEFAULT_SEED, parameters: dict | None = None,
                path=None) -> str:
    text = json.dumps(build_report(checks, config, seed, parameters), indent=2, ensure_ascii=False) + "\n"
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text
