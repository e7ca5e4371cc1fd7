"""Levi parametrix construction of the heat kernel on the periodic lattice (d=1).

With kappa(x, z) = base(z) + theta(x) mod(z) the frozen exponent is
Lambda_theta = psi_base + theta psi_mod, and

    q0(t, x, y) = (theta(x) - theta(y)) [L_mod p^{theta(y)}(t, ., y)](x),

where L_mod has Fourier multiplier -psi_mod. Integrals over an anchor z
that enters the frozen kernel p^{theta(z)} ("anchored" operators) are
evaluated by Chebyshev interpolation in theta:

    p^{theta}(t, .) ~ sum_k l_k(theta) p^{theta_k}(t, .),

so every anchored operator becomes a short sum of Fourier multipliers.
Time convolutions int_0^t Op_{t-s}[g(s)] ds are integrated exactly for
data g that is piecewise linear in s (exponential time differencing), on
a mesh graded toward s = 0 that contains every report time.

The computation is the semi-discrete problem on the lattice: the
multipliers are the exact exponents at the lattice frequencies, so the
lattice kernel is finite at s = 0 and the Volterra data are bounded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .frozen import GridError, KernelField, SpaceTimeGrid, frozen_kernel
from .measure import InadmissibleCaseError, LevyProfile, estimate_scaling, validate_case
from .symbol import CoefficientField, affine_exponent


class SeriesDivergenceError(ArithmeticError):
    pass


def _phi12(z):
    """phi1(z) = (e^z - 1)/z and phi2(z) = (e^z - 1 - z)/z^2, stable near 0."""
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < 0.5
    zs = np.where(small, z, 0.0)
    p1 = np.zeros_like(zs)
    p2 = np.zeros_like(zs)
    term = np.ones_like(zs)
    fact1, fact2 = 1.0, 2.0
    for j in range(18):
        p1 += term / fact1
        p2 += term / fact2
        term = term * zs
        fact1 *= (j + 2)
        fact2 *= (j + 3)
    zb = np.where(small, 1.0, z)
    ez = np.exp(zb)
    b1 = (ez - 1.0) / zb
    b2 = (ez - 1.0 - zb) / zb ** 2
    return np.where(small, p1, b1), np.where(small, p2, b2)


def chebyshev_nodes(a: float, b: float, K: int) -> np.ndarray:
    k = np.arange(K)
    return 0.5 * (a + b) + 0.5 * (b - a) * np.cos((2 * k + 1) * np.pi / (2 * K))


def lagrange_weights(nodes: np.ndarray, theta) -> np.ndarray:
    """l_k(theta) for Chebyshev (first kind) nodes via the barycentric formula; shape (K, ...)."""
    K = len(nodes)
    k = np.arange(K)
    bw = (-1.0) ** k * np.sin((2 * k + 1) * np.pi / (2 * K))
    th = np.asarray(theta, dtype=float)
    diff = th[None, ...] - nodes.reshape((K,) + (1,) * th.ndim)
    hit = diff == 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = bw.reshape((K,) + (1,) * th.ndim) / diff
        out = terms / terms.sum(axis=0, keepdims=True)
    anyhit = hit.any(axis=0)
    return np.where(anyhit[None, ...], hit.astype(float), out)


def legendre_family_nodes(a: float, b: float, K: int) -> np.ndarray:
    x, _ = np.polynomial.legendre.leggauss(K)
    return 0.5 * (a + b) + 0.5 * (b - a) * x


def lagrange_general(nodes: np.ndarray, theta) -> np.ndarray:
    """Lagrange basis at arbitrary distinct nodes (barycentric weights computed directly)."""
    K = len(nodes)
    bw = np.array([1.0 / np.prod(nodes[i] - np.delete(nodes, i)) for i in range(K)])
    bw /= np.max(np.abs(bw))
    th = np.asarray(theta, dtype=float)
    diff = th[None, ...] - nodes.reshape((K,) + (1,) * th.ndim)
    hit = diff == 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = bw.reshape((K,) + (1,) * th.ndim) / diff
        out = terms / terms.sum(axis=0, keepdims=True)
    return np.where(hit.any(axis=0)[None, ...], hit.astype(float), out)


def build_mesh(report: np.ndarray, h_max: float, ratio: float, s_min: float) -> tuple[np.ndarray, np.ndarray]:
    """Time mesh 0 = s_0 < ... containing every report node; returns (mesh, report indices)."""
    t0 = float(report[0])
    g = [t0]
    while g[-1] / ratio > s_min:
        nxt = g[-1] / ratio
        if g[-1] - nxt > h_max:
            nxt = g[-1] - h_max
        g.append(nxt)
    nodes = [0.0] + g[::-1]
    idx = [len(nodes) - 1]
    for a, b in zip(report[:-1], report[1:]):
        m = max(1, int(math.ceil((b - a) / h_max - 1e-9)))
        nodes.extend(a + (b - a) * np.arange(1, m + 1) / m)
        nodes[-1] = float(b)
        idx.append(len(nodes) - 1)
    return np.array(nodes), np.array(idx)


@dataclass(eq=False)
class VolterraTable:
    """Picard levels of q at the report nodes, their sup norms and the summed q on the mesh."""

    levels: list
    sup_norms: list
    y: object
    truncation_bound: float
    q: np.ndarray
    mesh: np.ndarray
    report_idx: np.ndarray
    burn_in: int = 0
    ratio_bounds: list = field(default_factory=list)

    @property
    def n_levels(self) -> int:
        return len(self.sup_norms)

    def at_reports(self) -> np.ndarray:
        return self.q[self.report_idx]


@dataclass(eq=False)
class HeatKernelField:
    """p(t_i, x_j; y) at the report times with its frozen and correction parts."""

    values: np.ndarray
    frozen: np.ndarray
    phi: np.ndarray
    y: float
    grid: SpaceTimeGrid
    case: str
    provenance: dict
    engine: "ParametrixEngine | None" = None
    table: VolterraTable | None = None

    @property
    def times(self):
        return self.grid.times

    def row(self, t: float) -> np.ndarray:
        return self.values[self.grid.time_index(t)]

    def x_mass(self) -> np.ndarray:
        return self.values.sum(axis=1) * self.grid.dx

    def row_mass(self) -> np.ndarray:
        """∫ p(t, x, y) dy at the lattice points x, per report time (via the constant source)."""
        if self.engine is None:
            # constant coefficient: ∫ f(y - x) dy is the lattice mass of the offset profile
            return np.repeat(self.x_mass()[:, None], self.grid.n, axis=1)
        return self.engine.apply(np.ones(self.grid.n))

    def to_csv(self, path) -> None:
        from . import io as lio
        x = self.grid.x
        rows = ((t, xx, self.y, p, pf, ph) for t, pr, fr, fi in
                zip(self.times, self.values, self.frozen, self.phi)
                for xx, p, pf, ph in zip(x, pr, fr, fi))
        lio.write_csv(path, ["t", "x", "y", "p_kappa", "p_frozen", "phi"], rows)

    def save(self, path) -> None:
        from . import io as lio
        lio.write_snapshot(path, 1, self.grid.n, self.grid.L, self.times, self.values)

    def as_kernel_field(self) -> KernelField:
        return KernelField(self.values, self.grid, self.y, self.case, {"target": self.y})


def choose_beta1(coeff: CoefficientField, alpha_h: float) -> float:
    return min(coeff.beta, 0.9 * alpha_h, 0.99)


def choose_M(beta1: float, alpha_h: float) -> float:
    return 0.5 * min(beta1, min(alpha_h, 1.0) - beta1)


class ParametrixEngine:
    """Semi-discrete parametrix on the torus lattice of ``grid`` (d=1)."""

    def __init__(self, profile: LevyProfile, coeff: CoefficientField, grid: SpaceTimeGrid,
                 case: str = "P3", h_max: float = 1.0 / 512, ratio: float = 1.05,
                 s_min: float = 1e-5, cheb_tol: float = 1e-10, series_tol: float = 1e-6,
                 max_levels: int = 20, certificate=None, beta1: float | None = None):
        if grid.dimension != 1:
            raise GridError("the parametrix engine is provided for d=1")
        if grid.geometry != "torus":
            raise GridError("the engine runs on the torus; use heat_kernel for line geometry")
        self.profile, self.coeff, self.grid = profile, coeff, grid
        self.case = case.upper()
        self.cert = certificate if certificate is not None else estimate_scaling(profile)
        validate_case(self.case, self.cert, profile, coeff)
        self.beta1 = choose_beta1(coeff, self.cert.alpha_h) if beta1 is None else beta1
        if not 0 < self.beta1 < min(coeff.beta, self.cert.alpha_h) + 1e-12:
            raise InadmissibleCaseError("beta1 must lie in (0, beta] ∩ (0, alpha_h)")
        self.M = choose_M(self.beta1, self.cert.alpha_h)
        self.series_tol, self.max_levels = series_tol, max_levels
        self.n, self.dx = grid.n, grid.dx
        self.xi = grid.xi
        aff = affine_exponent(profile, coeff, self.case)
        pb, pm = aff.parts(self.xi)
        self.psi_b, self.psi_m = np.asarray(pb, complex), np.asarray(pm, complex)
        self.psi_b[0] = self.psi_m[0] = 0.0
        self.theta_x = np.asarray(coeff.theta_at(grid.x), dtype=float)
        self.mesh, self.report_idx = build_mesh(grid.times, h_max, ratio, s_min)
        self.steps = np.diff(self.mesh)
        lo, hi = float(self.theta_x.min()), float(self.theta_x.max())
        if hi - lo < 1e-14:
            hi = lo + 1e-14
        self.theta_lo, self.theta_hi = lo, hi
        self.cheb_tol = cheb_tol
        self.K, self.cheb_error = self._choose_K(lo, hi)
        self.nodes = chebyshev_nodes(lo, hi, self.K)
        self.ell = lagrange_weights(self.nodes, self.theta_x)          # (K, n)
        self.lam = self.psi_b[None, :] + self.nodes[:, None] * self.psi_m[None, :]
        self._etd = {}

    # -- basic multipliers --------------------------------------------------------

    def Lambda(self, theta: float) -> np.ndarray:
        return self.psi_b + theta * self.psi_m

    def _ir(self, F) -> np.ndarray:
        return np.fft.irfft(F, self.n, axis=-1)

    def _r(self, f) -> np.ndarray:
        return np.fft.rfft(f, axis=-1)

    def delta(self, y: float) -> np.ndarray:
        e = np.zeros(self.n)
        e[self.grid.index_of(y)] = 1.0 / self.dx
        return e

    def frozen_semigroup(self, theta: float, f, t: float) -> np.ndarray:
        return self._ir(np.exp(-t * self.Lambda(theta)) * self._r(f))

    def anchored(self, f, tau: float, nodes=None, ell=None) -> np.ndarray:
        """A_tau[f](x) = ∫ p^{theta(z)}(tau, x, z) f(z) dz."""
        nodes = self.nodes if nodes is None else nodes
        ell = self.ell if ell is None else ell
        lam = self.psi_b[None, :] + nodes[:, None] * self.psi_m[None, :]
        F = self._r(ell * f[None, :])
        return self._ir((np.exp(-tau * lam) * F).sum(0))

    def q0_apply(self, f, tau: float, nodes=None, ell=None) -> np.ndarray:
        """Q0_tau[f](x) = ∫ q0(tau, x, z) f(z) dz."""
        nodes = self.nodes if nodes is None else nodes
        ell = self.ell if ell is None else ell
        lam = self.psi_b[None, :] + nodes[:, None] * self.psi_m[None, :]
        E = -self.psi_m[None, :] * np.exp(-tau * lam)
        F1 = (E * self._r(ell * f[None, :])).sum(0)
        F2 = (E * self._r(ell * (self.theta_x * f)[None, :])).sum(0)
        return self.theta_x * self._ir(F1) - self._ir(F2)

    def q0_delta(self, y: float, tau: float) -> np.ndarray:
        """q0(tau, ., y) with the exact frozen exponent at theta(y)."""
        ty = float(self.coeff.theta_at(y))
        g = self._ir(-self.psi_m * np.exp(-tau * self.Lambda(ty)) * self._r(self.delta(y)))
        return (self.theta_x - ty) * g

    # -- Chebyshev degree -----------------------------------------------------------

    def _choose_K(self, lo, hi):
        taus = np.concatenate([np.geomspace(1e-4, float(self.grid.times[-1]), 24)])
        test = 0.5 * (lo + hi) + 0.5 * (hi - lo) * np.cos(np.linspace(0.03, np.pi - 0.03, 37))
        scale_m = max(1.0, float(np.max(np.abs(self.psi_m))))
        for K in range(4, 65, 2):
            nodes = chebyshev_nodes(lo, hi, K)
            ell = lagrange_weights(nodes, test)                                  # (K, m)
            err = 0.0
            for tau in taus:
                Ek = np.exp(-tau * (self.psi_b[None, :] + nodes[:, None] * self.psi_m[None, :]))
                Et = np.exp(-tau * (self.psi_b[None, :] + test[:, None] * self.psi_m[None, :]))
                approx = ell.T @ Ek
                e1 = np.max(np.abs(approx - Et))
                e2 = np.max(np.abs(self.psi_m[None, :] * (approx - Et))) / scale_m
                err = max(err, e1, e2)
                if err > self.cheb_tol:
                    break
            if err <= self.cheb_tol:
                return K, err
        raise ArithmeticError("Chebyshev interpolation in theta did not reach the tolerance")

    # -- exponential time differencing ----------------------------------------------

    def _coeffs(self, h: float):
        key = round(h, 15)
        c = self._etd.get(key)
        if c is None:
            z = -h * self.lam
            p1, p2 = _phi12(z)
            c = (np.exp(z), h * (p1 - p2), h * p2)
            self._etd[key] = c
        return c

    def volterra(self, data: np.ndarray, kind: str = "Q0") -> np.ndarray:
        """out(s_i) = ∫_0^{s_i} Op_{s_i - s}[g(s)] ds with g linear between mesh nodes.

        kind "Q0" uses the q0 kernel, kind "A" the anchored frozen kernel.
        """
        N = len(self.mesh)
        out = np.zeros((N, self.n))
        tx = self.theta_x
        if kind == "Q0":
            G1p = self._r(self.ell * data[0][None, :])
            G2p = self._r(self.ell * (tx * data[0])[None, :])
            Y1 = np.zeros_like(G1p)
            Y2 = np.zeros_like(G2p)
            pm = -self.psi_m
            for i in range(1, N):
                E, a, b = self._coeffs(self.steps[i - 1])
                G1 = self._r(self.ell * data[i][None, :])
                G2 = self._r(self.ell * (tx * data[i])[None, :])
                Y1 = E * Y1 + a * G1p + b * G1
                Y2 = E * Y2 + a * G2p + b * G2
                out[i] = tx * self._ir(pm * Y1.sum(0)) - self._ir(pm * Y2.sum(0))
                G1p, G2p = G1, G2
            return out
        if kind == "A":
            Gp = self._r(self.ell * data[0][None, :])
            Y = np.zeros_like(Gp)
            for i in range(1, N):
                E, a, b = self._coeffs(self.steps[i - 1])
                G = self._r(self.ell * data[i][None, :])
                Y = E * Y + a * Gp + b * G
                out[i] = self._ir(Y.sum(0))
                Gp = G
            return out
        raise ValueError(kind)

    # -- series -----------------------------------------------------------------------

    def level0_delta(self, y: float) -> np.ndarray:
        return np.array([self.q0_delta(y, s) for s in self.mesh])

    def level0_source(self, f) -> np.ndarray:
        return np.array([self.q0_apply(f, s) for s in self.mesh])

    def ratio_model(self, n: int) -> float:
        """Beta-function decay shape of consecutive level norms (up to a fitted constant)."""
        a = self.M / self.cert.alpha_h
        return float(special.beta(a, max(n, 1) * a))

    def sum_series(self, data0: np.ndarray, y=None) -> VolterraTable:
        sup0 = float(np.max(np.abs(data0)))
        levels = [data0[self.report_idx].copy()]
        sups = [sup0]
        q = data0.copy()
        if sup0 == 0.0:
            return VolterraTable(levels, sups, y, 0.0, q, self.mesh, self.report_idx)
        cur = data0
        bound = math.inf
        ratio_bounds = []
        burn = 2
        for n in range(1, self.max_levels + 1):
            cur = self.volterra(cur, "Q0")
            s = float(np.max(np.abs(cur)))
            levels.append(cur[self.report_idx].copy())
            sups.append(s)
            q += cur
            qs = float(np.max(np.abs(q)))
            if n >= burn and s > 0:
                # fitted constant so the model ratio dominates every observed ratio past burn-in
                obs = [sups[j] / sups[j - 1] / self.ratio_model(j) for j in range(burn, n + 1)
                       if sups[j - 1] > 0]
                C = max(obs) if obs else 0.0
                ratio_bounds = [C * self.ratio_model(j) for j in range(1, n + 1)]
                tail, term, j = 0.0, s, n + 1
                while j < n + 400:
                    term *= C * self.ratio_model(j)
                    if term >= s * (1 - 1e-12) and j > n + 50:
                        tail = math.inf
                        break
                    tail += term
                    if term < 1e-18 * max(qs, 1e-300):
                        break
                    j += 1
                else:
                    tail = math.inf if term > 1e-3 * s else tail
                bound = tail
                if s + tail <= self.series_tol * qs:
                    return VolterraTable(levels, sups, y, tail, q, self.mesh, self.report_idx,
                                         burn, ratio_bounds)
            if s == 0.0:
                return VolterraTable(levels, sups, y, 0.0, q, self.mesh, self.report_idx)
        raise SeriesDivergenceError(
            f"series did not reach tolerance after {self.max_levels} levels; sup norms {sups[-3:]}, "
            f"tail bound {bound:.3g}")

    # -- assembled kernel --------------------------------------------------------------

    def phi(self, table: VolterraTable) -> np.ndarray:
        return self.volterra(table.q, "A")[self.report_idx]

    def kernel(self, y: float) -> HeatKernelField:
        y = self.grid.snap(y)
        ty = float(self.coeff.theta_at(y))
        d = self.delta(y)
        frozen = np.array([self.frozen_semigroup(ty, d, t) for t in self.grid.times])
        table = self.sum_series(self.level0_delta(y), y)
        phi = self.phi(table)
        prov = self.provenance(table)
        prov["target"] = y
        return HeatKernelField(frozen + phi, frozen, phi, y, self.grid, self.case, prov, self, table)

    def apply(self, f, return_table: bool = False):
        """P_t f(x) = ∫ p(t, x, y) f(y) dy at the report times."""
        f = np.asarray(f, dtype=float)
        frozen = np.array([self.anchored(f, t) for t in self.grid.times])
        table = self.sum_series(self.level0_source(f))
        out = frozen + self.phi(table)
        return (out, table) if return_table else out

    def provenance(self, table: VolterraTable | None = None) -> dict:
        g = self.grid
        out = {"profile": self.profile.name, "profile_params": dict(self.profile.params),
               "coefficient": self.coeff.name, "coefficient_params": dict(self.coeff.params),
               "grid": {"L": g.L, "n": g.n, "geometry": g.geometry,
                        "t_first": float(g.times[0]), "t_last": float(g.times[-1]),
                        "reports": int(len(g.times))},
               "case": self.case, "chebyshev_nodes": self.K, "chebyshev_error": self.cheb_error,
               "mesh_nodes": int(len(self.mesh)), "beta1": self.beta1, "M": self.M,
               "alpha_h": self.cert.alpha_h}
        if table is not None:
            out["series_levels"] = table.n_levels
            out["truncation_bound"] = table.truncation_bound
        return out

    # -- independent integral-equation residual --------------------------------------

    def integral_equation_residual(self, table: VolterraTable, y: float, t_list,
                                   gl_nodes: int = 8, grade: int = 6) -> float:
        """sup |q - q0 - q0 ⊛ q| / sup |q| at the given report times.

        The convolution is recomputed with Gauss-Legendre panels in s (split
        geometrically toward s = t) and a Legendre-family interpolation in theta
        with more nodes than the main path.
        """
        nodes = legendre_family_nodes(self.theta_lo, self.theta_hi, self.K + 8)
        ell = lagrange_general(nodes, self.theta_x)
        x, w = np.polynomial.legendre.leggauss(gl_nodes)
        qs = float(np.max(np.abs(table.q)))
        worst = 0.0
        for t in t_list:
            it = int(np.argmin(np.abs(self.mesh - t)))
            if abs(self.mesh[it] - t) > 1e-12:
                raise GridError("residual time must be a mesh node")
            conv = np.zeros(self.n)
            for i in range(it):
                a, b = self.mesh[i], self.mesh[i + 1]
                pieces = [(a, b)]
                if i == it - 1:
                    cuts = [a] + [b - (b - a) * 2.0 ** (-k) for k in range(1, grade + 1)] + [b]
                    pieces = list(zip(cuts[:-1], cuts[1:]))
                for lo, hi in pieces:
                    for xk, wk in zip(x, w):
                        s = 0.5 * (lo + hi) + 0.5 * (hi - lo) * xk
                        lamb = (s - a) / (b - a)
                        qsamp = (1 - lamb) * table.q[i] + lamb * table.q[i + 1]
                        conv += 0.5 * (hi - lo) * wk * self.q0_apply(qsamp, t - s, nodes, ell)
            q0t = self.q0_delta(y, t) if y is not None else None
            res = table.q[it] - q0t - conv
            worst = max(worst, float(np.max(np.abs(res))) / qs)
        return worst


def heat_kernel(profile: LevyProfile, coeff: CoefficientField, grid: SpaceTimeGrid,
                case: str = "P3", targets=(0.0,), **engine_kw) -> list:
    """p(t, x, y) on the grid for each target y."""
    case = case.upper()
    if coeff.is_constant:
        out = []
        for y in targets:
            y = grid.snap(y)
            if grid.geometry == "line":
                # offsets y - x reach past the box edge: evaluate on a doubled box and crop
                wide = SpaceTimeGrid(2 * grid.L, 2 * grid.n, grid.times, geometry="line",
                                     oversample=grid.oversample, period=grid.period)
                kf = frozen_kernel(profile, coeff, y, wide, case, check=engine_kw.get("check", True))
                vals = _offset_to_x(kf, y, slice(grid.n // 2, grid.n // 2 + grid.n))
            else:
                kf = frozen_kernel(profile, coeff, y, grid, case, check=engine_kw.get("check", True))
                vals = _offset_to_x(kf, y)
            prov = {"profile": profile.name, "coefficient": coeff.name, "series_levels": 0,
                    "case": case, "target": y, "geometry": grid.geometry}
            out.append(HeatKernelField(vals, vals.copy(), np.zeros_like(vals), y, grid, case, prov))
        return out
    engine_kw.pop("check", None)
    if grid.geometry == "torus":
        eng = ParametrixEngine(profile, coeff, grid, case, **engine_kw)
        return [eng.kernel(y) for y in targets]
    # line geometry: correction part on a torus twice as wide, frozen part on the line
    big = SpaceTimeGrid(2 * grid.L, 2 * grid.n, grid.times)
    eng = ParametrixEngine(profile, coeff.periodized(2 * grid.L), big, case, **engine_kw)
    wide = SpaceTimeGrid(2 * grid.L, 2 * grid.n, grid.times, geometry="line",
                         oversample=grid.oversample, period=grid.period)
    out = []
    for y in targets:
        y = grid.snap(y)
        hk = eng.kernel(y)
        kf = frozen_kernel(profile, coeff, y, wide, case)
        fr = _offset_to_x(kf, y, slice(grid.n // 2, grid.n // 2 + grid.n))
        phi = hk.phi[:, grid.n // 2: grid.n // 2 + grid.n]
        out.append(HeatKernelField(fr + phi, fr, phi, y, grid, case, hk.provenance))
    return out


def _offset_to_x(kf: KernelField, y: float, cols=None) -> np.ndarray:
    """p(t, x_j, y) = f(y - x_j) from an offset field; offsets off the box wrap on the torus."""
    g = kf.grid
    j = np.arange(g.n) if cols is None else np.arange(g.n)[cols]
    ky = g.index_of(y)
    # u = y - x_j = (ky - j) dx, offset index = ky - j + n/2
    idx = ky - j + g.n // 2
    if g.geometry == "line" and (idx.min() < 0 or idx.max() >= g.n):
        raise GridError("target too far from the centre for the line geometry")
    return kf.values[:, idx % g.n]


def q0_pointwise(profile: LevyProfile, coeff: CoefficientField, t: float, x: float, y: float,
                 case: str = "P3", grid: SpaceTimeGrid | None = None) -> float:
    """q0(t, x, y) = ∫ delta^{K_y}(t, x, y; z) (kappa(x,z) - kappa(y,z)) J(z) dz by ring quadrature."""
    from .operator import apply_L_eps
    if coeff.is_constant or x == y:
        return 0.0
    if grid is None:
        grid = SpaceTimeGrid(32.0, 2048, np.array([t]))
    g = grid.with_times(np.array([t]))
    kf = frozen_kernel(profile, coeff, y, g, case, check=False)
    vals = _offset_to_x(kf, g.snap(y))[0]
    dth = float(coeff.theta_at(x)) - float(coeff.theta_at(y))
    return dth * apply_L_eps(profile, coeff.mod, vals, x, 0.0, case, grid=g)
