"""Independent ground truth: closed forms, a method-of-lines solver, direct convolutions."""

from __future__ import annotations

import math

import numpy as np

from .frozen import GridError, SpaceTimeGrid
from .measure import LevyProfile
from .operator import _image_weights, _moments, ring_rule
from .symbol import CoefficientField


class StiffnessError(ArithmeticError):
    pass


def cauchy_closed_form(t, x):
    """Density of the 1-stable process with exponent pi|xi|."""
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    return t / ((np.pi * t) ** 2 + x ** 2)


def cauchy_periodic(t, x, period: float):
    """Cauchy density wrapped onto a circle of the given period (Poisson kernel)."""
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    a = 2.0 * np.pi ** 2 * t / period
    return np.sinh(a) / (np.cosh(a) - np.cos(2.0 * np.pi * x / period)) / period


def cauchy_gradient(t, x):
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    return -2.0 * x * t / ((np.pi * t) ** 2 + x ** 2) ** 2


def cauchy_time_derivative(t, x):
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    q = (np.pi * t) ** 2 + x ** 2
    return (q - 2 * np.pi ** 2 * t ** 2) / q ** 2


def stable_constant(alpha: float, d: int) -> float:
    """c with psi(xi) = c |xi|^alpha for nu(r) = r^{-d-alpha}."""
    if d == 1:
        if abs(alpha - 1.0) < 1e-15:
            return math.pi
        return 2.0 * math.gamma(1.0 - alpha) * math.cos(math.pi * alpha / 2) / alpha
    if d == 2:
        return 2 * math.pi * math.gamma(1 - alpha / 2) / (alpha * 2 ** alpha * math.gamma(1 + alpha / 2))
    raise ValueError("d must be 1 or 2")


def stable_closed_forms(alpha: float, d: int, r_or_xi):
    """(h(r), K(r), psi(r)) for nu(r) = r^{-d-alpha}, the last read as |xi| = r."""
    if not 0 < alpha < 2:
        raise ValueError("alpha must lie in (0, 2)")
    r = np.asarray(r_or_xi, dtype=float)
    w = 2.0 if d == 1 else 2.0 * math.pi
    h = w * r ** -alpha * (1.0 / (2.0 - alpha) + 1.0 / alpha)
    K = w * r ** -alpha / (2.0 - alpha)
    psi = stable_constant(alpha, d) * r ** alpha
    return h, K, psi


# -- direct convolutions ----------------------------------------------------------

def riemann_convolution(f, g, dx: float) -> np.ndarray:
    """(f ⊛ g)(x_i) = sum_j f(x_j) g(x_i - x_j) dx on the periodic lattice x_j = -L + j dx."""
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    n = f.size
    i = np.arange(n)
    out = np.empty(n)
    for k in range(n):
        out[k] = np.dot(f, g[(k - i + n // 2) % n])
    return out * dx


def spectral_convolution(f, g, dx: float) -> np.ndarray:
    n = len(f)
    c = np.fft.irfft(np.fft.rfft(f) * np.fft.rfft(g), n) * dx
    return np.roll(c, -(n // 2))


# -- method of lines ----------------------------------------------------------------

def _cubic_weights(frac):
    """Lagrange weights for nodes -1, 0, 1, 2 at position frac in [0, 1)."""
    s = frac
    return np.stack([-s * (s - 1) * (s - 2) / 6, (s + 1) * (s - 1) * (s - 2) / 2,
                     -(s + 1) * s * (s - 2) / 2, (s + 1) * s * (s - 1) / 6], -1)


def _circulant_row(profile, weight, L, n, case):
    """First row c of the circulant so that (A f)_i = sum_j c[(j - i) mod n] f_j."""
    dx = 2 * L / n
    c = np.zeros(n)
    zc = min(0.5, 2 * dx)
    r, w = ring_rule(zc, L, dx)
    z = np.concatenate([r, -r])
    wz = np.concatenate([w, w]) * np.asarray(weight(z), dtype=float) * profile.J(z)
    pos = z / dx
    base = np.floor(pos).astype(int)
    cw = _cubic_weights(pos - base)
    for k, off in enumerate((-1, 0, 1, 2)):
        np.add.at(c, (base + off) % n, wz * cw[:, k])
    c[0] -= wz.sum()
    if case == "P1":
        comp = np.where(np.abs(z) < 1.0, z, 0.0)
        g = float(np.sum(wz * comp))
        # gradient by 4th-order central differences
        for off, coef in ((-2, 1 / 12), (-1, -8 / 12), (1, 8 / 12), (2, -1 / 12)):
            c[off % n] -= g * coef / dx
    # images of the long jumps, lattice trapezoid on [-L, L)
    u = dx * (np.arange(n) - n // 2)
    Wi = _image_weights(profile, weight, L, u)
    Wi[0] = 0.5 * (Wi[0] + float(_image_weights(profile, weight, L, np.array([L]))[0]))
    img = np.zeros(n)
    img[(np.arange(n) - n // 2) % n] = Wi * dx
    c += img
    c[0] -= img.sum()
    # core: Taylor moments with finite differences
    m = _moments(profile, weight, zc, 4, first=2 if case == "P1" else 1)
    d1 = {-2: 1 / 12, -1: -8 / 12, 1: 8 / 12, 2: -1 / 12}
    d2 = {-2: -1 / 12, -1: 16 / 12, 0: -30 / 12, 1: 16 / 12, 2: -1 / 12}
    d4 = {-2: 1.0, -1: -4.0, 0: 6.0, 1: -4.0, 2: 1.0}
    if case != "P1" and m[1] != 0.0:
        for off, coef in d1.items():
            c[off % n] += m[1] * coef / dx
    for off, coef in d2.items():
        c[off % n] += 0.5 * m[2] * coef / dx ** 2
    for off, coef in d4.items():
        c[off % n] += m[4] / 24.0 * coef / dx ** 4
    return c


def assemble_operator(profile: LevyProfile, coeff, grid: SpaceTimeGrid, case: str = "P3",
                      max_n: int = 1024) -> np.ndarray:
    """Dense matrix of L^kappa on the torus lattice (d=1, n <= max_n)."""
    if grid.dimension != 1 or grid.geometry != "torus":
        raise GridError("the dense oracle works on the d=1 torus")
    if grid.n > max_n:
        raise GridError(f"dense assembly is capped at n = {max_n}")
    n = grid.n
    idx = (np.arange(n)[None, :] - np.arange(n)[:, None]) % n
    if isinstance(coeff, CoefficientField):
        A = _circulant_row(profile, coeff.base, grid.L, n, case)[idx]
        if not coeff.is_constant:
            th = np.asarray(coeff.theta_at(grid.x), dtype=float)
            A = A + th[:, None] * _circulant_row(profile, coeff.mod, grid.L, n, case)[idx]
        return A
    return _circulant_row(profile, coeff, grid.L, n, case)[idx]


# Dormand-Prince 5(4) tableau
_C = np.array([0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1, 1])
_A = [[], [1 / 5], [3 / 40, 9 / 40], [44 / 45, -56 / 15, 32 / 9],
      [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
      [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
      [35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]]
_B5 = np.array([35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0])
_B4 = np.array([5179 / 57600, 0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])


def dp45(rhs, y0, t_final: float, rtol: float = 1e-8, atol: float = 1e-12, h0: float | None = None,
         h_min: float = 1e-14, max_steps: int = 200000):
    """Adaptive Dormand-Prince integration with a sup-norm error controller."""
    y = np.array(y0, dtype=float)
    t = 0.0
    h = h0 or min(t_final, 1e-3)
    k1 = rhs(y)
    steps = rejected = 0
    while t < t_final * (1 - 1e-15):
        h = min(h, t_final - t)
        if h < h_min:
            raise StiffnessError(f"step size underflow at t = {t}")
        ks = [k1]
        for s in range(1, 7):
            ys = y + h * sum(a * k for a, k in zip(_A[s], ks))
            ks.append(rhs(ys))
        y5 = y + h * sum(b * k for b, k in zip(_B5, ks))
        err = h * sum((b5 - b4) * k for b5, b4, k in zip(_B5, _B4, ks))
        scale = atol + rtol * max(np.max(np.abs(y)), np.max(np.abs(y5)))
        e = float(np.max(np.abs(err))) / scale
        if e <= 1.0:
            t += h
            y = y5
            k1 = ks[6]
            steps += 1
        else:
            rejected += 1
        h *= min(5.0, max(0.2, 0.9 * (1.0 / max(e, 1e-16)) ** 0.2))
        if steps + rejected > max_steps:
            raise StiffnessError("step budget exhausted")
    return y, {"steps": steps, "rejected": rejected}


def mol_evolve(profile: LevyProfile, coeff, initial, t_final: float, grid: SpaceTimeGrid,
               case: str = "P3", rtol: float = 1e-8, return_info: bool = False):
    """u(t_final) for ∂_t u = L^kappa u with u(0) = initial (backward equation in x)."""
    A = assemble_operator(profile, coeff, grid, case)
    y, info = dp45(lambda u: A @ u, initial, t_final, rtol=rtol)
    return (y, info) if return_info else y
