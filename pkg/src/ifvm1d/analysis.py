"""Manufactured solutions, the Gauss-Lobatto projection, error norms, dual-mesh
diagnostics, and convergence-rate regression."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .meshing import Mesh, element_basis
from .polynomials import integrate_split
from .solver import InterfaceProblem, SolutionField

__all__ = [
    "ExactSolution",
    "ErrorReport",
    "RateFit",
    "PiHResult",
    "GaussNorms",
    "manufactured",
    "gl_projection",
    "error_report",
    "fit_rates",
    "pi_h",
    "discrete_norms",
    "NORM_NAMES",
]

NORM_NAMES = ("e_N", "e_inf", "e_L", "flux_G", "e_0", "e_1", "e_P")

# errors below this are treated as roundoff-saturated and excluded from the
# rate regression
SATURATION = 1e-13


@dataclass(frozen=True)
class ExactSolution:
    """Side-aware closed-form solution with derivative, flux and source."""

    beta_minus: float
    beta_plus: float
    alpha: float
    gamma: float
    c: float
    kind: str                 # "smooth" | "nonsmooth"
    m: int | None
    domain: tuple
    _value: tuple = field(repr=False, default=None)
    _deriv: tuple = field(repr=False, default=None)
    _flux: tuple = field(repr=False, default=None)
    _source: tuple = field(repr=False, default=None)

    def _sided(self, pair, x, side):
        x = np.asarray(x, dtype=float)
        fl, fr = pair
        low = x < self.alpha if side != "left" else x <= self.alpha
        vals = np.where(low, fl(x), fr(x))
        return float(vals) if vals.ndim == 0 else vals

    def value(self, x, side: str = "auto"):
        return self._sided(self._value, x, side)

    def deriv(self, x, side: str = "auto"):
        return self._sided(self._deriv, x, side)

    def flux(self, x, side: str = "auto"):
        return self._sided(self._flux, x, side)

    def source(self, x, side: str = "auto"):
        return self._sided(self._source, x, side)

    def beta(self, x, side: str = "auto"):
        x = np.asarray(x, dtype=float)
        low = x < self.alpha if side != "left" else x <= self.alpha
        vals = np.where(low, self.beta_minus, self.beta_plus)
        return float(vals) if vals.ndim == 0 else vals

    def as_problem(self) -> InterfaceProblem:
        a, b = self.domain
        return InterfaceProblem(
            self.beta_minus, self.beta_plus, self.alpha, self.gamma, self.c,
            self.source, self.domain,
            u_a=self.value(a), u_b=self.value(b),
        )


def manufactured(kind: str, beta_minus: float, beta_plus: float,
                 alpha: float = math.pi / 6, gamma: float = 0.0, c: float = 0.0,
                 m: int = 2, domain: tuple = (0.0, 1.0)) -> ExactSolution:
    """Piecewise-cosine exact solution: cos(x)/beta on each side (shifted for
    continuity), optionally perturbed by (x - alpha)^m / beta+ on the right so
    that the flux's m-th derivative jumps at the interface."""
    if kind not in ("smooth", "nonsmooth"):
        raise ValueError(f"unknown solution kind {kind!r}")
    if kind == "nonsmooth" and m < 2:
        raise ValueError("nonsmooth perturbation needs m >= 2")
    bm, bp = beta_minus, beta_plus
    shift = (1.0 / bm - 1.0 / bp) * math.cos(alpha)
    mm = m if kind == "nonsmooth" else 0

    def u_l(x):
        return np.cos(x) / bm

    def u_r(x):
        base = np.cos(x) / bp + shift
        if mm:
            base = base + (x - alpha) ** mm / bp
        return base

    def du_l(x):
        return -np.sin(x) / bm

    def du_r(x):
        d = -np.sin(x) / bp
        if mm:
            d = d + mm * (x - alpha) ** (mm - 1) / bp
        return d

    def flux_l(x):
        return -np.sin(x)

    def flux_r(x):
        f = -np.sin(x)
        if mm:
            f = f + mm * (x - alpha) ** (mm - 1)
        return f

    def f_l(x):
        return np.cos(x) + gamma * du_l(x) + c * u_l(x)

    def f_r(x):
        f = np.cos(x) + gamma * du_r(x) + c * u_r(x)
        if mm:
            f = f - mm * (mm - 1) * (x - alpha) ** (mm - 2)
        return f

    return ExactSolution(bm, bp, alpha, gamma, c, kind,
                         m if kind == "nonsmooth" else None, domain,
                         (u_l, u_r), (du_l, du_r), (flux_l, flux_r), (f_l, f_r))


def _element_cuts(eb, mesh):
    return [mesh.alpha] if eb.is_interface else []


def gl_projection(u: ExactSolution, mesh: Mesh, p: int) -> SolutionField:
    """Truncated (generalized) Lobatto expansion: endpoint values for the two
    nodal modes, flux-weighted quotients for the interior modes."""
    N = mesh.n_elems
    bases = tuple(element_basis(mesh, i, p, u.beta_minus, u.beta_plus)
                  for i in range(1, N + 1))
    coeffs = np.zeros((N, p + 1))
    for i in range(1, N + 1):
        eb = bases[i - 1]
        coeffs[i - 1, 0] = u.value(eb.x_left)
        coeffs[i - 1, 1] = u.value(eb.x_right)
        cuts = _element_cuts(eb, mesh)
        for n in range(2, p + 1):
            num = integrate_split(
                lambda x, eb=eb, n=n: np.asarray(u.flux(x))
                * eb.deriv[n](eb.to_ref(x)) * 2.0 / eb.h,
                eb.x_left, eb.x_right, cuts, order=p + 6,
            )
            den = _energy_diag(eb, n, u.beta_minus, u.beta_plus, mesh)
            coeffs[i - 1, n] = num / den
    return SolutionField(mesh, p, coeffs, bases, u.beta_minus, u.beta_plus)


def _energy_diag(eb, n, beta_minus, beta_plus, mesh) -> float:
    """Exact value of the element integral of beta * (phi_n')^2."""
    if eb.is_interface:
        dl, dr = eb.deriv[n].left, eb.deriv[n].right
        ref = (beta_minus * (dl * dl).integral(-1.0, eb.alpha_hat)
               + beta_plus * (dr * dr).integral(eb.alpha_hat, 1.0))
    else:
        beta = beta_minus if eb.mid < mesh.alpha else beta_plus
        d = eb.deriv[n].right
        ref = beta * (d * d).integral(-1.0, 1.0)
    return ref * 2.0 / eb.h


@dataclass(frozen=True)
class ErrorReport:
    """The seven error measures of one solve at mesh size h."""

    h: float
    e_N: float
    e_inf: float
    e_L: float
    flux_G: float
    e_0: float
    e_1: float
    e_P: float

    def norm(self, name: str) -> float:
        return getattr(self, name)


def error_report(sol: SolutionField, exact: ExactSolution,
                 mesh: Mesh | None = None) -> ErrorReport:
    mesh = mesh or sol.mesh
    p = sol.degree
    N = mesh.n_elems
    nodes = np.asarray(mesh.nodes)

    node_err = sol.node_values() - exact.value(nodes)
    e_N = float(np.max(np.abs(node_err)))
    e_P = float(np.max(np.abs(np.diff(node_err))))

    e_inf = 0.0
    e_L = 0.0
    flux_G = 0.0
    sq_0 = 0.0
    sq_1 = 0.0
    for i in range(1, N + 1):
        eb = sol.bases[i - 1]
        # uniform sampling: 10 points per element, 10 per sub-element at the
        # interface
        if eb.is_interface:
            panels = [(np.linspace(eb.x_left, mesh.alpha, 10), "left"),
                      (np.linspace(mesh.alpha, eb.x_right, 10), "right")]
        else:
            panels = [(np.linspace(eb.x_left, eb.x_right, 10), "right")]
        for xs, side in panels:
            diff = (sol.eval_on_element(i, eb.to_ref(xs), side=side)
                    - exact.value(xs, side=side))
            e_inf = max(e_inf, float(np.max(np.abs(diff))))
        # Lobatto points (endpoint roots included)
        lob = np.asarray(eb.lobatto_pts)
        xl = eb.to_phys(lob)
        diff = sol.eval_on_element(i, lob) - exact.value(xl)
        e_L = max(e_L, float(np.max(np.abs(diff))))
        # flux at Gauss points
        g = np.asarray(eb.gauss.points)
        xg = eb.to_phys(g)
        fdiff = sol.flux_on_element(i, g) - exact.flux(xg)
        flux_G = max(flux_G, float(np.max(np.abs(fdiff))))
        # L2 and H1 contributions, split at the interface
        cuts = _element_cuts(eb, mesh)
        sq_0 += integrate_split(
            lambda x, i=i, eb=eb: (sol.eval_on_element(i, eb.to_ref(x))
                                   - exact.value(x)) ** 2,
            eb.x_left, eb.x_right, cuts, order=p + 6,
        )
        sq_1 += integrate_split(
            lambda x, i=i, eb=eb: (
                (sol.flux_on_element(i, eb.to_ref(x)) - exact.flux(x))
                / exact.beta(x)
            ) ** 2,
            eb.x_left, eb.x_right, cuts, order=p + 6,
        )
    return ErrorReport(mesh.h_max, e_N, e_inf, e_L, flux_G,
                       math.sqrt(sq_0), math.sqrt(sq_1), e_P)


@dataclass(frozen=True)
class RateFit:
    rate: float | None
    n_used: int
    n_excluded: int


def fit_rates(reports, saturation: float = SATURATION) -> dict:
    """Least-squares slope of log(error) against log(1/h), per norm.

    Entries below the saturation threshold are excluded as roundoff-limited;
    a norm with fewer than two usable points gets rate None.
    """
    if len(reports) < 3:
        raise ValueError("need at least three reports for a rate fit")
    hs = np.asarray([r.h for r in reports])
    if len(set(hs.tolist())) != len(hs):
        raise ValueError("reports must have distinct mesh sizes")
    out = {}
    for name in NORM_NAMES:
        errs = np.asarray([r.norm(name) for r in reports])
        keep = errs > saturation
        n_excl = int(np.sum(~keep))
        if np.sum(keep) < 2:
            out[name] = RateFit(None, int(np.sum(keep)), n_excl)
            continue
        slope = np.polyfit(np.log(1.0 / hs[keep]), np.log(errs[keep]), 1)[0]
        out[name] = RateFit(float(-slope), int(np.sum(keep)), n_excl)
    return out


@dataclass(frozen=True)
class PiHResult:
    """Coefficients of the dual-mesh image of a trial function: jumps
    [v_{i,j}] = A_{i,j} (beta v')(g_{i,j}) and their cumulative sums."""

    jumps: np.ndarray         # shape (N, p), all (i, j) in Z_N x Z_p
    values: np.ndarray        # shape (N, p); entry (N-1, p-1) is inactive
    h_elems: np.ndarray

    def seminorm_1(self) -> float:
        return math.sqrt(float(np.sum(self.jumps ** 2 / self.h_elems[:, None])))

    def norm_0(self) -> float:
        sq = np.sum(self.values[:, :] ** 2 * self.h_elems[:, None])
        # the last element contributes only p - 1 active volumes
        sq -= self.values[-1, -1] ** 2 * self.h_elems[-1]
        return math.sqrt(float(sq))

    def closure_defect(self) -> float:
        """Telescoped sum of all jumps; zero for homogeneous boundary data."""
        return float(np.sum(self.jumps))


def pi_h(sol: SolutionField) -> PiHResult:
    """Map a trial function with zero boundary values to its dual-mesh
    coefficients via the weighted flux jumps at Gauss points."""
    scale = float(np.max(np.abs(sol.coeffs), initial=0.0))
    if abs(sol.coeffs[0, 0]) > 1e-12 * max(scale, 1.0) or \
            abs(sol.coeffs[-1, 1]) > 1e-12 * max(scale, 1.0):
        raise ValueError("dual mapping requires zero boundary values")
    N = sol.mesh.n_elems
    p = sol.degree
    jumps = np.zeros((N, p))
    hs = np.zeros(N)
    for i in range(1, N + 1):
        eb = sol.bases[i - 1]
        hs[i - 1] = eb.h
        _, wts = eb.gauss_phys
        flux = sol.flux_on_element(i, np.asarray(eb.gauss.points))
        jumps[i - 1, :] = wts * flux
    values = np.cumsum(jumps.ravel()).reshape(N, p)
    return PiHResult(jumps, values, hs)


@dataclass(frozen=True)
class GaussNorms:
    semi_G: float             # discrete flux seminorm |v|_G
    norm_0: float
    semi_1: float

    @property
    def norm_G(self) -> float:
        return math.sqrt(self.semi_G ** 2 + self.norm_0 ** 2 + self.semi_1 ** 2)


def discrete_norms(v, mesh: Mesh | None = None, p: int | None = None) -> GaussNorms:
    """Discrete energy seminorm at Gauss points plus the continuous L2/H1
    pieces, for a SolutionField or an ExactSolution."""
    if isinstance(v, SolutionField):
        mesh, p, bases = v.mesh, v.degree, v.bases
        flux_at = lambda i, xi: v.flux_on_element(i, xi)
        val = lambda x: np.asarray([v.eval(xx) for xx in np.atleast_1d(x)])
        der = lambda x: np.asarray([v.eval_deriv(xx) for xx in np.atleast_1d(x)])
    else:
        if mesh is None or p is None:
            raise ValueError("mesh and degree are required for closed-form input")
        bases = tuple(element_basis(mesh, i, p, v.beta_minus, v.beta_plus)
                      for i in range(1, mesh.n_elems + 1))
        flux_at = lambda i, xi: v.flux(bases[i - 1].to_phys(xi))
        val = v.value
        der = v.deriv
    semi_sq = 0.0
    l2_sq = 0.0
    h1_sq = 0.0
    for i in range(1, mesh.n_elems + 1):
        eb = bases[i - 1]
        _, wts = eb.gauss_phys
        flux = np.asarray(flux_at(i, np.asarray(eb.gauss.points)))
        semi_sq += float(np.sum(wts * flux ** 2))
        cuts = _element_cuts(eb, mesh)
        l2_sq += integrate_split(lambda x: np.asarray(val(x)) ** 2,
                                 eb.x_left, eb.x_right, cuts, order=p + 6)
        h1_sq += integrate_split(lambda x: np.asarray(der(x)) ** 2,
                                 eb.x_left, eb.x_right, cuts, order=p + 6)
    return GaussNorms(math.sqrt(semi_sq), math.sqrt(l2_sq), math.sqrt(h1_sq))
