"""Polynomials and piecewise polynomials on the reference interval [-1, 1].

Provides exact monomial-basis arithmetic, classical Legendre/Lobatto
polynomials, their generalizations orthogonal under a piecewise-constant
weight 1/beta with a single interior breakpoint, root finding for the
piecewise case, and the associated weighted Gauss quadrature rules.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import numpy.polynomial.polynomial as npp
from numpy.polynomial.legendre import leggauss
from scipy.optimize import brentq

__all__ = [
    "Poly",
    "PiecewisePoly",
    "RefInterface",
    "QuadRule",
    "OrthogonalizationError",
    "RootFindingError",
    "legendre",
    "lobatto_std",
    "gen_legendre",
    "gen_lobatto",
    "weighted_inner",
    "roots_in",
    "gauss_rule",
    "integrate_split",
]


class OrthogonalizationError(RuntimeError):
    """Raised when the weighted Gram-Schmidt process breaks down."""


class RootFindingError(RuntimeError):
    """Raised when a bracketed root fails to converge; carries the bracket."""

    def __init__(self, msg, bracket=None):
        super().__init__(msg)
        self.bracket = bracket


def _trim(coeffs):
    c = np.atleast_1d(np.asarray(coeffs, dtype=float))
    n = len(c)
    while n > 1 and c[n - 1] == 0.0:
        n -= 1
    return tuple(c[:n])


@dataclass(frozen=True)
class Poly:
    """Real polynomial in the monomial basis, ascending-degree coefficients."""

    coeffs: tuple

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _trim(self.coeffs))
        if not np.all(np.isfinite(self.coeffs)):
            raise ValueError("non-finite polynomial coefficients")

    @staticmethod
    def monomial(n: int) -> "Poly":
        return Poly((0.0,) * n + (1.0,))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, x):
        return npp.polyval(np.asarray(x, dtype=float), self.coeffs)

    def deriv(self) -> "Poly":
        if self.degree == 0:
            return Poly((0.0,))
        return Poly(npp.polyder(self.coeffs))

    def antideriv(self, lower: float = -1.0) -> "Poly":
        """Antiderivative vanishing at `lower`."""
        c = npp.polyint(self.coeffs)
        c[0] = -npp.polyval(lower, c)
        return Poly(c)

    def integral(self, a: float, b: float) -> float:
        c = npp.polyint(self.coeffs)
        return float(npp.polyval(b, c) - npp.polyval(a, c))

    def __add__(self, other):
        other = other if isinstance(other, Poly) else Poly((float(other),))
        return Poly(npp.polyadd(self.coeffs, other.coeffs))

    def __sub__(self, other):
        other = other if isinstance(other, Poly) else Poly((float(other),))
        return Poly(npp.polysub(self.coeffs, other.coeffs))

    def __mul__(self, other):
        if isinstance(other, Poly):
            return Poly(npp.polymul(self.coeffs, other.coeffs))
        return Poly(np.asarray(self.coeffs) * float(other))

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0


@dataclass(frozen=True)
class PiecewisePoly:
    """Two polynomial pieces on [-1, breakpoint] and [breakpoint, 1].

    Value queries exactly at the breakpoint must pass an explicit side flag;
    there is no silent averaging.
    """

    breakpoint: float
    left: Poly
    right: Poly

    def __post_init__(self):
        if not -1.0 < self.breakpoint < 1.0:
            raise ValueError("breakpoint must lie strictly inside (-1, 1)")

    @classmethod
    def from_poly(cls, poly: Poly, breakpoint: float = 0.0) -> "PiecewisePoly":
        return cls(breakpoint, poly, poly)

    @property
    def is_smooth(self) -> bool:
        return self.left.coeffs == self.right.coeffs

    def __call__(self, x, side: str | None = None):
        x = np.asarray(x, dtype=float)
        at_break = x == self.breakpoint
        if np.any(at_break) and side is None and not self.is_smooth:
            raise ValueError(
                "evaluation at the breakpoint requires side='left' or side='right'"
            )
        use_left = x < self.breakpoint
        if side == "left":
            use_left = use_left | at_break
        vals = np.where(use_left, self.left(x), self.right(x))
        return float(vals) if vals.ndim == 0 else vals

    def deriv(self) -> "PiecewisePoly":
        return PiecewisePoly(self.breakpoint, self.left.deriv(), self.right.deriv())

    def pieces(self):
        """Yield (lo, hi, poly) for the two pieces."""
        yield (-1.0, self.breakpoint, self.left)
        yield (self.breakpoint, 1.0, self.right)


def _as_piecewise(f, breakpoint=0.0) -> PiecewisePoly:
    if isinstance(f, Poly):
        return PiecewisePoly.from_poly(f, breakpoint)
    return f


@dataclass(frozen=True)
class RefInterface:
    """Reference-element interface data: jump (beta-, beta+) at alpha_hat."""

    beta_minus: float
    beta_plus: float
    alpha_hat: float

    def __post_init__(self):
        if self.beta_minus <= 0.0 or self.beta_plus <= 0.0:
            raise ValueError("diffusion coefficients must be positive")
        if not -1.0 < self.alpha_hat < 1.0:
            raise ValueError("alpha_hat must lie strictly inside (-1, 1)")

    def weight_moment(self, k: int) -> float:
        """Integral of w(xi) * xi^k over [-1, 1] with w = 1/beta, in closed form."""
        a = self.alpha_hat
        left = (a ** (k + 1) - (-1.0) ** (k + 1)) / (k + 1)
        right = (1.0 - a ** (k + 1)) / (k + 1)
        return left / self.beta_minus + right / self.beta_plus

    def weighted_poly_integral(self, f: PiecewisePoly) -> float:
        """Integral of w * f over [-1, 1], exact per polynomial piece."""
        a = self.alpha_hat
        return (
            f.left.integral(-1.0, a) / self.beta_minus
            + f.right.integral(a, 1.0) / self.beta_plus
        )


@dataclass(frozen=True)
class QuadRule:
    """Quadrature points in (-1, 1) with positive weights."""

    points: tuple
    weights: tuple

    def __post_init__(self):
        pts = np.asarray(self.points)
        wts = np.asarray(self.weights)
        if len(pts) != len(wts):
            raise ValueError("points and weights must have equal length")
        if np.any(np.diff(pts) <= 0.0):
            raise ValueError("quadrature points must be strictly increasing")
        if np.any(pts <= -1.0) or np.any(pts >= 1.0):
            raise ValueError("quadrature points must be strictly interior")
        if np.any(wts <= 0.0):
            raise ValueError("quadrature weights must be positive")


@lru_cache(maxsize=None)
def legendre(n: int) -> Poly:
    """Standard Legendre polynomial P_n, normalized so P_n(1) = 1."""
    if n < 0:
        raise ValueError("degree must be nonnegative")
    if n == 0:
        return Poly((1.0,))
    if n == 1:
        return Poly((0.0, 1.0))
    p_prev, p = legendre(n - 2), legendre(n - 1)
    xi = Poly((0.0, 1.0))
    return ((2 * n - 1) / n) * (xi * p) - ((n - 1) / n) * p_prev


@lru_cache(maxsize=None)
def lobatto_std(n: int) -> Poly:
    """Standard Lobatto polynomial: hat functions for n = 0, 1, else the
    antiderivative of P_{n-1} vanishing at -1."""
    if n < 0:
        raise ValueError("degree must be nonnegative")
    if n == 0:
        return Poly((0.5, -0.5))
    if n == 1:
        return Poly((0.5, 0.5))
    return legendre(n - 1).antideriv(-1.0)


def weighted_inner(f, g, iface: RefInterface) -> float:
    """Exact weighted inner product (f, g)_w with w = 1/beta, split at alpha_hat."""
    f = _as_piecewise(f, iface.alpha_hat)
    g = _as_piecewise(g, iface.alpha_hat)
    for h in (f, g):
        if not h.is_smooth and abs(h.breakpoint - iface.alpha_hat) > 1e-14:
            raise ValueError("operand breakpoint does not match the interface")
    prod = PiecewisePoly(iface.alpha_hat, f.left * g.left, f.right * g.right)
    return iface.weighted_poly_integral(prod)


@lru_cache(maxsize=None)
def _gen_legendre_family(n: int, iface: RefInterface):
    """Orthogonal family L_0..L_n under (., .)_w, each normalized at xi = 1.

    Classical Gram-Schmidt on the monomial basis with exact piecewise moment
    integrals; each vector is re-orthogonalized once for stability.
    """
    polys: list[Poly] = []
    norms: list[float] = []
    for k in range(n + 1):
        q = Poly.monomial(k)
        for _ in range(2):
            for lm, cm in zip(polys, norms):
                q = q - (weighted_inner(q, lm, iface) / cm) * lm
        c = weighted_inner(q, q, iface)
        scale = iface.weight_moment(0) if k == 0 else norms[0]
        if not np.isfinite(c) or c <= 1e-300 * scale:
            raise OrthogonalizationError(
                f"weighted Gram-Schmidt breakdown at degree {k}: "
                f"norm {c:.3e}, condition estimate {norms[0] / max(c, 1e-300):.3e}"
            )
        polys.append(q)
        norms.append(c)
    # normalize so L_k(1) = 1; roots of an orthogonal polynomial for a positive
    # weight are interior, so the value at 1 is nonzero
    out = []
    for q in polys:
        v = q(1.0)
        if v == 0.0 or not np.isfinite(v):
            raise OrthogonalizationError("degenerate normalization value at xi = 1")
        out.append((1.0 / v) * q)
    return tuple(out)


def gen_legendre(n: int, iface: RefInterface) -> Poly:
    """Generalized Legendre polynomial: degree n, orthogonal to all lower
    degrees under the weight 1/beta, normalized so L_n(1) = 1."""
    if n < 0:
        raise ValueError("degree must be nonnegative")
    return _gen_legendre_family(n, iface)[n]


@lru_cache(maxsize=None)
def gen_lobatto(n: int, iface: RefInterface) -> PiecewisePoly:
    """Generalized Lobatto polynomial: interface-aware hats for n = 0, 1, else
    the piecewise antiderivative of w * L_{n-1} vanishing at -1."""
    if n < 0:
        raise ValueError("degree must be nonnegative")
    bm, bp, a = iface.beta_minus, iface.beta_plus, iface.alpha_hat
    if n == 0:
        denom = (1.0 - a) * bm + (1.0 + a) * bp
        left = Poly(((1.0 - a) * bm + a * bp, -bp)) * (1.0 / denom)
        right = Poly((bm, -bm)) * (1.0 / denom)
        return PiecewisePoly(a, left, right)
    if n == 1:
        denom = (1.0 - a) * bm + (1.0 + a) * bp
        left = Poly((bp, bp)) * (1.0 / denom)
        right = Poly((-a * bm + (1.0 + a) * bp, bm)) * (1.0 / denom)
        return PiecewisePoly(a, left, right)
    # harmonic-average scaling keeps the equal-beta reduction an exact
    # coefficient identity with the standard Lobatto family
    scale = 2.0 / iface.weight_moment(0)
    ln = scale * gen_legendre(n - 1, iface)
    left = ((1.0 / bm) * ln).antideriv(-1.0)
    right_raw = (1.0 / bp) * ln
    c = npp.polyint(right_raw.coeffs)
    # continuity at the breakpoint fixes the right piece's constant
    c[0] += left(a) - npp.polyval(a, c)
    return PiecewisePoly(a, left, Poly(c))


def roots_in(f, lo: float, hi: float, dedup: float = 1e-12):
    """All real roots of a (piecewise) polynomial in [lo, hi], sorted.

    Roots are located per piece by sign-change bracketing on a dense sampling
    grid and refined by bracketed iteration; grid points whose residual is
    already below 1e-13 of the piece scale count as roots directly.
    """
    f = _as_piecewise(f)
    if lo >= hi:
        raise ValueError("empty interval")
    roots = []
    for plo, phi, poly in f.pieces():
        a, b = max(lo, plo), min(hi, phi)
        if b <= a:
            continue
        deg = max(poly.degree, 1)
        grid = np.linspace(a, b, 64 * deg + 1)
        vals = poly(grid)
        scale = float(np.max(np.abs(vals)))
        if scale == 0.0:
            raise ValueError("polynomial piece vanishes identically on the interval")
        tol = 1e-13 * scale
        flat = np.abs(vals) <= tol
        roots.extend(grid[flat])
        for j in range(len(grid) - 1):
            if flat[j] or flat[j + 1]:
                continue
            if vals[j] * vals[j + 1] < 0.0:
                try:
                    r = brentq(poly, grid[j], grid[j + 1], xtol=1e-15, rtol=8.9e-16)
                except (RuntimeError, ValueError) as exc:
                    raise RootFindingError(
                        f"root refinement failed in [{grid[j]}, {grid[j + 1]}]",
                        bracket=(grid[j], grid[j + 1]),
                    ) from exc
                if abs(poly(r)) > tol * 10:
                    raise RootFindingError(
                        f"residual {poly(r):.3e} above tolerance at root {r}",
                        bracket=(grid[j], grid[j + 1]),
                    )
                roots.append(float(r))
    roots.sort()
    merged: list[float] = []
    for r in roots:
        if merged and abs(r - merged[-1]) <= dedup:
            continue
        merged.append(r)
    return merged


@lru_cache(maxsize=None)
def gauss_rule(p: int, iface: RefInterface) -> QuadRule:
    """p-point Gauss rule for the weight w = 1/beta: points are the roots of
    L_p, weights integrate the Lagrange cardinal polynomials against w.

    Exact for integrands of degree up to 2p - 1.
    """
    if p < 1:
        raise ValueError("need at least one quadrature point")
    lp = gen_legendre(p, iface)
    pts = roots_in(PiecewisePoly.from_poly(lp, iface.alpha_hat), -1.0, 1.0)
    if len(pts) != p:
        raise RootFindingError(
            f"expected {p} quadrature points, found {len(pts)}"
        )
    wts = []
    for j, xj in enumerate(pts):
        others = [x for i, x in enumerate(pts) if i != j]
        ell = Poly(npp.polyfromroots(others)) if others else Poly((1.0,))
        ell = (1.0 / ell(xj)) * ell
        wts.append(weighted_inner(ell, Poly((1.0,)), iface))
    total = iface.weight_moment(0)
    if abs(sum(wts) - total) > 1e-13 * abs(total):
        raise OrthogonalizationError(
            f"quadrature weights sum to {sum(wts)!r}, expected {total!r}"
        )
    return QuadRule(tuple(pts), tuple(wts))


def integrate_split(f, lo: float, hi: float, breakpoints=(), order: int = 8) -> float:
    """Composite Gauss-Legendre quadrature on [lo, hi], cut at the interior
    breakpoints. Exact for piecewise polynomials of degree <= 2*order - 1 on
    the induced pieces; `f` must accept numpy arrays."""
    if lo >= hi:
        raise ValueError("empty interval")
    if order < 1:
        raise ValueError("order must be positive")
    nodes, wts = leggauss(order)
    cuts = [lo] + sorted(b for b in breakpoints if lo < b < hi) + [hi]
    total = 0.0
    for s0, s1 in zip(cuts[:-1], cuts[1:]):
        half = 0.5 * (s1 - s0)
        x = 0.5 * (s0 + s1) + half * nodes
        total += half * float(np.dot(wts, np.asarray(f(x), dtype=float)))
    return total
