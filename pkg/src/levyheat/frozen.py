"""Frozen-coefficient heat kernels by discrete Fourier inversion.

The kernel frozen at w is the density of a Lévy process Y with exponent
psi_w; p(t, x, y) = f_t(y - x) with

    f_t(u) = (2 pi)^{-d} ∫ e^{-i<u, xi>} e^{-t psi_w(xi)} dxi.

Two geometries are provided. ``torus`` samples the periodic lattice
[-L, L)^d exactly (the periodized density). ``line`` (d=1) inverts on a
much longer, finer lattice, crops to [-L, L) and removes the leading
first-order-in-t contribution of the periodic images, so the result
approximates the density on the real line.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.ndimage import map_coordinates

from . import io as lio
from .measure import LevyProfile, bound_rho, h_inverse, tail_mass
from .symbol import CoefficientField, affine_exponent, exponent_envelope


class AliasingError(ValueError):
    pass


class GridError(ValueError):
    pass


LINE_PERIOD = 16384.0


@dataclass(frozen=True, eq=False)
class SpaceTimeGrid:
    """Lattice x_j = -L + j dx (j < n) per axis and increasing time nodes."""

    L: float
    n: int
    times: np.ndarray
    dimension: int = 1
    geometry: str = "torus"
    oversample: int = 2
    period: float = LINE_PERIOD

    def __post_init__(self):
        if self.n < 8 or self.n & (self.n - 1):
            raise GridError("points per axis must be a power of two >= 8")
        if self.L <= 0:
            raise GridError("half-width must be positive")
        t = np.asarray(self.times, dtype=float)
        if t.ndim != 1 or t.size == 0 or np.any(t <= 0) or np.any(np.diff(t) <= 0):
            raise GridError("time nodes must be positive and strictly increasing")
        object.__setattr__(self, "times", t)
        if self.geometry not in ("torus", "line"):
            raise GridError("geometry is 'torus' or 'line'")
        if self.geometry == "line" and self.dimension != 1:
            raise GridError("line geometry is provided for d=1 only")

    @property
    def dx(self) -> float:
        return 2.0 * self.L / self.n

    @property
    def x(self) -> np.ndarray:
        return -self.L + self.dx * np.arange(self.n)

    @property
    def xi(self) -> np.ndarray:
        """Non-negative lattice frequencies (rfft layout)."""
        return 2.0 * np.pi * np.fft.rfftfreq(self.n, self.dx)

    @property
    def cell(self) -> float:
        return self.dx ** self.dimension

    @property
    def finest_dx(self) -> float:
        return self.dx / self.oversample if self.geometry == "line" else self.dx

    def with_times(self, times) -> "SpaceTimeGrid":
        return SpaceTimeGrid(self.L, self.n, np.asarray(times, dtype=float), self.dimension,
                             self.geometry, self.oversample, self.period)

    def refined(self) -> "SpaceTimeGrid":
        """Same box and times with half the spacing."""
        return SpaceTimeGrid(self.L, 2 * self.n, self.times, self.dimension, self.geometry,
                             self.oversample, self.period)

    def time_index(self, t: float, rtol: float = 1e-9) -> int:
        k = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[k] - t) > rtol * max(1.0, abs(t)):
            raise GridError(f"time {t} is not a grid node")
        return k

    def index_of(self, x: float) -> int:
        j = (x + self.L) / self.dx
        k = int(round(j))
        if abs(j - k) > 1e-9 or not 0 <= k < self.n:
            raise GridError(f"point {x} is not on the lattice")
        return k

    def snap(self, x: float) -> float:
        k = int(round((x + self.L) / self.dx)) % self.n
        return float(self.x[k])

    @classmethod
    def graded(cls, L: float, n: int, T: float, t_min: float, count: int, **kw) -> "SpaceTimeGrid":
        """Geometric time nodes from t_min to T."""
        return cls(L, n, np.geomspace(t_min, T, count), **kw)

    def check(self, profile: LevyProfile, coeff: CoefficientField, case: str = "P3",
              tol_fft: float = 1e-8, grid_margin: float = 8.0, w=0.0) -> dict:
        """Aliasing and margin checks for the smallest time node."""
        t0 = float(self.times[0])
        kmax = math.pi / self.finest_dx
        star = exponent_envelope(profile, coeff, kmax, w=w, case=case)
        alias = math.exp(-t0 * coeff.kappa0 / coeff.kappa1 * star) if coeff.kappa1 else 0.0
        alias = max(alias, math.exp(-t0 * star))
        if alias > tol_fft:
            raise AliasingError(f"exp(-t_min psi*(pi/dx)) = {alias:.3g} exceeds tol_fft = {tol_fft:g}")
        scale = float(h_inverse(profile, 1.0 / t0))
        if self.L < grid_margin * scale:
            raise GridError(f"L = {self.L} below {grid_margin} h^-1(1/t_min) = {grid_margin * scale:.4g}")
        return {"aliasing": alias, "margin": self.L / scale}


@dataclass(eq=False)
class KernelField:
    """Kernel samples values[i, j] = f_{t_i}(u_j) on the offset lattice u = y - x."""

    values: np.ndarray
    grid: SpaceTimeGrid
    anchor: object
    case: str
    meta: dict = field(default_factory=dict)
    source: Callable | None = None

    @property
    def times(self):
        return self.grid.times

    def row(self, t: float) -> np.ndarray:
        return self.values[self.grid.time_index(t)]

    def mass(self) -> np.ndarray:
        axes = tuple(range(1, self.values.ndim))
        return self.values.sum(axis=axes) * self.grid.cell

    def interp(self, i: int, u) -> np.ndarray:
        """Cubic interpolation of time row i at offsets u; extrapolation is refused."""
        g = self.grid
        u = np.asarray(u, dtype=float)
        if g.dimension == 1:
            if np.any(u < -g.L) or np.any(u > g.L - g.dx):
                raise GridError("offset outside the lattice box")
            return CubicSpline(g.x, self.values[i])(u)
        if np.any(u < -g.L) or np.any(u > g.L - g.dx):
            raise GridError("offset outside the lattice box")
        c = (u + g.L) / g.dx
        return map_coordinates(self.values[i], np.moveaxis(c, -1, 0), order=3, mode="nearest")

    def to_csv(self, path) -> None:
        if self.grid.dimension != 1:
            raise ValueError("CSV dump is defined for d=1")
        x = self.grid.x
        rows = ((t, xx, v) for t, vals in zip(self.times, self.values) for xx, v in zip(x, vals))
        lio.write_csv(path, ["t", "x", "p"], rows)

    def save(self, path) -> None:
        lio.write_snapshot(path, self.grid.dimension, self.grid.n, self.grid.L, self.times, self.values)


def load_field(path, case: str = "P3", anchor=None, geometry: str = "torus") -> KernelField:
    d, n, L, times, values = lio.read_snapshot(path)
    return KernelField(values, SpaceTimeGrid(L, n, times, d, geometry), anchor, case)


# -- spectral inversion ---------------------------------------------------------

def _offset_spectrum(grid: SpaceTimeGrid, exponent: Callable, order, n: int, dx: float):
    """Frequencies, conj psi and derivative factor for the offset density."""
    d = grid.dimension
    if d == 1:
        xi = 2.0 * np.pi * np.fft.rfftfreq(n, dx)
        psi = np.conj(exponent(xi))
        fac = (1j * xi) ** order[0] if order[0] else 1.0
        sign = (-1.0) ** np.arange(xi.size)
        return xi, psi, fac, sign
    k1 = 2.0 * np.pi * np.fft.fftfreq(n, dx)
    k2 = 2.0 * np.pi * np.fft.rfftfreq(n, dx)
    X1, X2 = np.meshgrid(k1, k2, indexing="ij")
    psi = np.conj(exponent(np.stack([X1, X2], -1)))
    fac = (1j * X1) ** order[0] * (1j * X2) ** order[1]
    i1 = np.arange(n)
    i2 = np.arange(k2.size)
    sign = (-1.0) ** np.add.outer(i1, i2)
    return (X1, X2), psi, fac, sign


def _invert(grid: SpaceTimeGrid, exponent: Callable, times, order=(0, 0), time_power: int = 0):
    """Offset densities (times, n[, n]) plus the mass that falls outside the crop."""
    d = grid.dimension
    if grid.geometry == "torus":
        n, dx = grid.n, grid.dx
    else:
        dx = grid.finest_dx
        n = 1 << int(math.ceil(math.log2(max(grid.period, 4 * grid.L) / dx)))
    _, psi, fac, sign = _offset_spectrum(grid, exponent, order, n, dx)
    out = np.empty((len(times),) + (grid.n,) * d)
    outside = np.zeros(len(times))
    for i, t in enumerate(times):
        spec = np.exp(-t * psi) * fac * sign
        if time_power:
            spec = spec * (-psi) ** time_power
        if d == 1:
            full = np.fft.irfft(spec, n) / dx
        else:
            full = np.fft.irfft2(spec, (n, n)) / dx ** 2
        if grid.geometry == "torus":
            out[i] = full
        else:
            step = grid.oversample
            c = n // 2
            idx = c + step * (np.arange(grid.n) - grid.n // 2)
            out[i] = full[idx]
            if order == (0, 0) and time_power == 0:
                inner = full[c - step * grid.n // 2: c + step * grid.n // 2].sum() * dx
                outside[i] = full.sum() * dx - inner
    return out, outside


def _image_sum(weight_density: Callable, u, P: float, terms: int = 2000, tail: float = 0.0):
    """sum_{m != 0} W(u + m P) for |u| << P, with a tail remainder per side."""
    m = np.arange(1, terms + 1, dtype=float)[:, None]
    uu = np.asarray(u, dtype=float)[None, :]
    s = weight_density(uu + m * P).sum(0) + weight_density(uu - m * P).sum(0)
    return s + tail


def frozen_kernel(profile: LevyProfile, coeff: CoefficientField, w, grid: SpaceTimeGrid,
                  case: str = "P3", order=0, tol_fft: float = 1e-8, neg_tol: float = 1e-9,
                  check: bool = True, time_power: int = 0) -> KernelField:
    """Offset kernel of the operator with coefficient frozen at w."""
    case = case.upper()
    d = grid.dimension
    if profile.dimension != d:
        raise GridError("profile and grid dimensions differ")
    order = (order, 0) if np.ndim(order) == 0 else tuple(order) + (0,) * (2 - len(order))
    if sum(order) > 3:
        raise ValueError("derivative order above 3")
    alias = None
    if check:
        alias = grid.check(profile, coeff, case, tol_fft=tol_fft, grid_margin=0.0, w=w)["aliasing"]
    aff = affine_exponent(profile, coeff, case)
    wp = w if d == 1 or np.ndim(w) else np.array([w, 0.0])
    theta = float(np.asarray(coeff.theta_at(wp)).reshape(-1)[0])
    expo = lambda xi: aff.at_theta(theta, xi)
    vals, outside = _invert(grid, expo, grid.times, order, time_power)
    meta = {"theta": theta, "order": order, "aliasing": alias, "geometry": grid.geometry,
            "time_power": time_power}
    if grid.geometry == "line" and order == (0, 0) and time_power == 0:
        W = lambda z: coeff(wp, z) * profile.J(z)
        dxf = grid.finest_dx
        P = (1 << int(math.ceil(math.log2(max(grid.period, 4 * grid.L) / dxf)))) * dxf
        far = 2000.5 * P
        tail = float(coeff.kappa1) * tail_mass(profile, far) / P if profile.upper_cut > far else 0.0
        img = _image_sum(W, -grid.x, P, tail=0.5 * tail)
        vals = vals - grid.times[:, None] * img[None, :]
        meta["period"] = P
        meta["outside_mass"] = outside
    if order == (0, 0) and time_power == 0:
        low = float(vals.min())
        meta["min_value"] = low
        bad = vals < -neg_tol
        meta["clipped"] = int(bad.sum())
        if bad.any():
            vals = np.where(bad, -neg_tol, vals)

    def source(new_order=(0, 0), new_time_power=0):
        return frozen_kernel(profile, coeff, w, grid, case, new_order, tol_fft, neg_tol, False,
                             new_time_power)

    return KernelField(vals, grid, w, case, meta, source)


def frozen_gradient(field: KernelField, order=1) -> KernelField:
    """Spectral derivative of the offset density (multiply by (i xi)^order)."""
    if field.source is None:
        raise ValueError("field carries no spectral source")
    order = (order, 0) if np.ndim(order) == 0 else tuple(order) + (0,) * (2 - len(order))
    if sum(order) > 3:
        raise ValueError("derivative order above 3")
    return field.source(order, 0)


def frozen_time_derivative(field: KernelField) -> KernelField:
    """Exact ∂_t of the offset density: inversion of -psi e^{-t psi}."""
    if field.source is None:
        raise ValueError("field carries no spectral source")
    return field.source((0, 0), 1)


def x_gradient_of(field: KernelField, i: int, x, y):
    """∂_x p(t_i, x, y) = -f'(y - x)."""
    g = frozen_gradient(field, 1)
    return -g.interp(i, np.asarray(y, dtype=float) - np.asarray(x, dtype=float))


def delta_increment(field: KernelField, case: str, i: int, x: float, y: float, z, grad=None):
    """Increment of p(t_i, ., y) at x along z in the form fixed by the case (d=1)."""
    case = case.upper()
    z = np.asarray(z, dtype=float)
    u0 = y - x
    p0 = field.interp(i, u0)
    if case == "P3":
        return 0.5 * (field.interp(i, u0 - z) + field.interp(i, u0 + z) - 2.0 * p0)
    dp = field.interp(i, u0 - z) - p0
    if case == "P2":
        return dp
    if case == "P1":
        if grad is None:
            grad = frozen_gradient(field, 1)
        gx = -float(grad.interp(i, u0))
        return dp - np.where(np.abs(z) < 1.0, z * gx, 0.0)
    raise ValueError(f"unknown case {case!r}")


def _kappa_distance(coeff_a: CoefficientField, coeff_b: CoefficientField, w) -> float:
    r = np.logspace(-6, 6, 241)
    z = np.concatenate([-r[::-1], r])
    if coeff_a.dimension == 2:
        z = np.stack([z, 0 * z], -1)
    return float(np.max(np.abs(coeff_a(w, z) - coeff_b(w, z))))


def kernel_kappa_sensitivity(profile: LevyProfile, coeff_a: CoefficientField,
                             coeff_b: CoefficientField, w, grid: SpaceTimeGrid,
                             case: str = "P3") -> float:
    """sup |p_a - p_b| / (||kappa_a(w,.) - kappa_b(w,.)||_inf rho_t) over the grid."""
    dist = _kappa_distance(coeff_a, coeff_b, w)
    if dist == 0.0:
        return 0.0
    pa = frozen_kernel(profile, coeff_a, w, grid, case, check=False).values
    pb = frozen_kernel(profile, coeff_b, w, grid, case, check=False).values
    ratio = 0.0
    for i, t in enumerate(grid.times):
        u = grid.x if grid.dimension == 1 else _radii(grid)
        rho = bound_rho(profile, float(t), u)
        ratio = max(ratio, float(np.max(np.abs(pa[i] - pb[i]) / rho)))
    return ratio / dist


def _radii(grid: SpaceTimeGrid):
    X1, X2 = np.meshgrid(grid.x, grid.x, indexing="ij")
    return np.hypot(X1, X2)


class KernelCache:
    """Write-once cache of frozen kernels keyed by lattice index."""

    def __init__(self, profile, coeff, grid, case="P3"):
        self.profile, self.coeff, self.grid, self.case = profile, coeff, grid, case
        self._store: dict = {}
        self._lock = threading.Lock()

    def __contains__(self, k):
        return k in self._store

    def get(self, k: int) -> KernelField:
        try:
            return self._store[k]
        except KeyError:
            raise KeyError(f"anchor {k} was not precomputed") from None

    def fill(self, indices) -> None:
        for k in indices:
            if k in self._store:
                continue
            f = frozen_kernel(self.profile, self.coeff, float(self.grid.x[k]), self.grid, self.case,
                              check=False)
            with self._lock:
                self._store.setdefault(k, f)
