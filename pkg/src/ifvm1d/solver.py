"""Assembly and direct solution of the immersed finite volume scheme, plus a
Galerkin (immersed finite element) reference solver on the same trial space."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg as sla

from .meshing import DualMesh, ElementBasis, Mesh, dual_partition, element_basis
from .polynomials import integrate_split

__all__ = [
    "InterfaceProblem",
    "LinearSystem",
    "SolutionField",
    "SolverError",
    "DofMap",
    "assemble_ifvm",
    "assemble_ifem",
    "solve",
    "conservation_residual",
]


class SolverError(RuntimeError):
    """Raised on pivot breakdown or an unacceptable solve residual."""


@dataclass(frozen=True)
class InterfaceProblem:
    """-(beta u')' + gamma u' + c u = f on (a, b) \\ {alpha}, Dirichlet data at
    both ends, with continuity of u and of the flux beta u' at alpha."""

    beta_minus: float
    beta_plus: float
    alpha: float
    gamma: float
    c: float
    source: Callable          # f(x), vectorized over numpy arrays
    domain: tuple
    u_a: float = 0.0
    u_b: float = 0.0

    def __post_init__(self):
        if self.beta_minus <= 0.0 or self.beta_plus <= 0.0:
            raise ValueError("diffusion coefficients must be positive")
        a, b = self.domain
        if not a < self.alpha < b:
            raise ValueError("interface must lie strictly inside the domain")

    def beta(self, x, side: str = "auto"):
        x = np.asarray(x, dtype=float)
        low = x < self.alpha if side != "left" else x <= self.alpha
        vals = np.where(low, self.beta_minus, self.beta_plus)
        return float(vals) if vals.ndim == 0 else vals


class DofMap:
    """Element-ordered numbering of the Np - 1 trial-space unknowns: each
    element's interior modes, then its right node. Bandwidth <= 2p + 1."""

    def __init__(self, n_elems: int, p: int):
        self.n_elems = n_elems
        self.p = p
        self.size = n_elems * p - 1

    def node(self, i: int):
        """Global index of node x_i; 'a'/'b' for the Dirichlet endpoints."""
        if i == 0:
            return "a"
        if i == self.n_elems:
            return "b"
        return i * self.p - 1

    def local(self, elem: int, n: int):
        """Global index of local mode n on element elem."""
        if n == 0:
            return self.node(elem - 1)
        if n == 1:
            return self.node(elem)
        return (elem - 1) * self.p + n - 2


@dataclass
class LinearSystem:
    matrix: np.ndarray
    rhs: np.ndarray
    dof_map: DofMap
    mesh: Mesh
    degree: int
    problem: InterfaceProblem
    bases: tuple
    dual: DualMesh


def _build_bases(problem: InterfaceProblem, mesh: Mesh, p: int):
    return tuple(
        element_basis(mesh, i, p, problem.beta_minus, problem.beta_plus)
        for i in range(1, mesh.n_elems + 1)
    )


def _flux_table(eb: ElementBasis, problem: InterfaceProblem):
    """fluxes[j, n] = beta * phi_n'(g_j) at the element's reference Gauss
    points; beta * phi' is continuous across the breakpoint by construction."""
    p = len(eb.basis) - 1
    pts = np.asarray(eb.gauss.points)
    out = np.empty((len(pts), p + 1))
    for j, xi in enumerate(pts):
        if eb.is_interface:
            side = "left" if xi < eb.alpha_hat else "right"
            beta = problem.beta_minus if side == "left" else problem.beta_plus
        else:
            side = "right"
            beta = problem.beta(eb.mid)
        for n in range(p + 1):
            out[j, n] = beta * eb.deriv[n](xi, side=side) * 2.0 / eb.h
    return out


def _scatter(A, rhs, row, col, val, problem):
    if col == "a":
        rhs[row] -= problem.u_a * val
    elif col == "b":
        rhs[row] -= problem.u_b * val
    else:
        A[row, col] += val


def assemble_ifvm(problem: InterfaceProblem, mesh: Mesh, p: int) -> LinearSystem:
    """One flux-balance equation per active control volume; Dirichlet data is
    lifted into the right-hand side through the boundary nodal modes."""
    _check_compatible(problem, mesh)
    bases = _build_bases(problem, mesh, p)
    dual = dual_partition(mesh, bases)
    dofs = DofMap(mesh.n_elems, p)
    A = np.zeros((dofs.size, dofs.size))
    rhs = np.zeros(dofs.size)
    fluxes = [_flux_table(eb, problem) for eb in bases]
    rhs_order = p + 6

    for row, vol in enumerate(dual.volumes):
        i, j = vol.elem, vol.j
        # flux at the left endpoint g_{i,j} (element i, Gauss index j)
        for n in range(p + 1):
            _scatter(A, rhs, row, dofs.local(i, n), fluxes[i - 1][j - 1, n], problem)
        # flux at the right endpoint: g_{i,j+1}, or g_{i+1,1} when crossing
        er, jr = (i, j + 1) if j < p else (i + 1, 1)
        for n in range(p + 1):
            _scatter(A, rhs, row, dofs.local(er, n),
                     -fluxes[er - 1][jr - 1, n], problem)
        # lower-order terms, elementwise so each segment is a single piece
        if problem.gamma != 0.0 or problem.c != 0.0:
            for e in range(i, er + 1):
                eb = bases[e - 1]
                s0 = max(vol.lo, eb.x_left)
                s1 = min(vol.hi, eb.x_right)
                if s1 <= s0:
                    continue
                cuts = [mesh.alpha] if eb.is_interface else []
                for n in range(p + 1):
                    val = integrate_split(
                        lambda x, eb=eb, n=n: (
                            problem.gamma * eb.deriv[n](eb.to_ref(x)) * 2.0 / eb.h
                            + problem.c * eb.basis[n](eb.to_ref(x))
                        ),
                        s0, s1, cuts, order=p + 3,
                    )
                    _scatter(A, rhs, row, dofs.local(e, n), val, problem)
        # source integral over the volume, split at any node and at alpha
        cuts = [x for x in mesh.nodes if vol.lo < x < vol.hi]
        if vol.lo < mesh.alpha < vol.hi:
            cuts.append(mesh.alpha)
        rhs[row] += integrate_split(problem.source, vol.lo, vol.hi, cuts,
                                    order=rhs_order)
    return LinearSystem(A, rhs, dofs, mesh, p, problem, bases, dual)


def _piece_bounds(eb: ElementBasis):
    """Reference sub-intervals on which every basis function is one polynomial."""
    if eb.is_interface:
        return ((-1.0, eb.alpha_hat, "left"), (eb.alpha_hat, 1.0, "right"))
    return ((-1.0, 1.0, "right"),)


def assemble_ifem(problem: InterfaceProblem, mesh: Mesh, p: int) -> LinearSystem:
    """Galerkin system on the same trial space: entries integrate
    beta u'v' + gamma u'v + c uv exactly per polynomial piece."""
    _check_compatible(problem, mesh)
    bases = _build_bases(problem, mesh, p)
    dual = dual_partition(mesh, bases)
    dofs = DofMap(mesh.n_elems, p)
    A = np.zeros((dofs.size, dofs.size))
    rhs = np.zeros(dofs.size)

    for eb in bases:
        i = eb.elem
        beta_of = {"left": problem.beta_minus, "right": problem.beta_plus}
        if not eb.is_interface:
            beta_elem = problem.beta(eb.mid)
            beta_of = {"left": beta_elem, "right": beta_elem}
        loc = np.zeros((p + 1, p + 1))
        for lo, hi, side in _piece_bounds(eb):
            for m in range(p + 1):
                pm = getattr(eb.basis[m], side)
                dm = getattr(eb.deriv[m], side)
                for n in range(p + 1):
                    pn = getattr(eb.basis[n], side)
                    dn = getattr(eb.deriv[n], side)
                    val = beta_of[side] * (dm * dn).integral(lo, hi) * 2.0 / eb.h
                    val += problem.gamma * (pm * dn).integral(lo, hi)
                    val += problem.c * (pm * pn).integral(lo, hi) * 0.5 * eb.h
                    loc[m, n] += val
        cuts = [mesh.alpha] if eb.is_interface else []
        for m in range(p + 1):
            row = dofs.local(i, m)
            if row in ("a", "b"):
                continue
            for n in range(p + 1):
                _scatter(A, rhs, row, dofs.local(i, n), loc[m, n], problem)
            rhs[row] += integrate_split(
                lambda x, eb=eb, m=m: np.asarray(problem.source(x))
                * eb.basis[m](eb.to_ref(x)),
                eb.x_left, eb.x_right, cuts, order=p + 6,
            )
    return LinearSystem(A, rhs, dofs, mesh, p, problem, bases, dual)


def _check_compatible(problem: InterfaceProblem, mesh: Mesh):
    if abs(problem.alpha - mesh.alpha) > 1e-14:
        raise ValueError("problem and mesh disagree on the interface location")
    if abs(problem.domain[0] - mesh.a) > 1e-14 or abs(problem.domain[1] - mesh.b) > 1e-14:
        raise ValueError("problem and mesh disagree on the domain")


@dataclass(frozen=True)
class SolutionField:
    """Per-element coefficients over the (generalized) Lobatto basis with
    side-aware point evaluation of values and fluxes."""

    mesh: Mesh
    degree: int
    coeffs: np.ndarray        # shape (N, p + 1), nodal modes shared
    bases: tuple
    beta_minus: float
    beta_plus: float

    def _locate(self, x: float, side: str) -> int:
        nodes = np.asarray(self.mesh.nodes)
        if x < self.mesh.a - 1e-12 or x > self.mesh.b + 1e-12:
            raise ValueError(f"point {x} outside the domain")
        if side == "left":
            i = int(np.searchsorted(nodes, x, side="left"))
            return max(i, 1)
        i = int(np.searchsorted(nodes, x, side="right"))
        return min(i, self.mesh.n_elems)

    def _ref_side(self, side: str) -> str:
        return "right" if side == "auto" else side

    def eval(self, x: float, side: str = "auto") -> float:
        i = self._locate(x, side)
        eb = self.bases[i - 1]
        xi = float(eb.to_ref(x))
        s = self._ref_side(side)
        return float(sum(self.coeffs[i - 1, n] * eb.basis[n](xi, side=s)
                         for n in range(self.degree + 1)))

    def eval_deriv(self, x: float, side: str = "auto") -> float:
        i = self._locate(x, side)
        eb = self.bases[i - 1]
        xi = float(eb.to_ref(x))
        s = self._ref_side(side)
        return float(sum(self.coeffs[i - 1, n] * eb.deriv[n](xi, side=s)
                         for n in range(self.degree + 1)) * 2.0 / eb.h)

    def eval_flux(self, x: float, side: str = "auto") -> float:
        beta = self.beta_minus if (x < self.mesh.alpha or
                                   (x == self.mesh.alpha and side == "left")) \
            else self.beta_plus
        return beta * self.eval_deriv(x, side)

    def eval_on_element(self, i: int, xi, side: str = "right"):
        """Vectorized value at reference points xi of element i."""
        eb = self.bases[i - 1]
        xi = np.asarray(xi, dtype=float)
        out = np.zeros_like(xi)
        for n in range(self.degree + 1):
            out += self.coeffs[i - 1, n] * eb.basis[n](xi, side=side)
        return out

    def flux_on_element(self, i: int, xi, side: str = "right"):
        """Vectorized flux beta u' at reference points xi of element i."""
        eb = self.bases[i - 1]
        xi = np.asarray(xi, dtype=float)
        du = np.zeros_like(xi)
        for n in range(self.degree + 1):
            du += self.coeffs[i - 1, n] * eb.deriv[n](xi, side=side)
        du *= 2.0 / eb.h
        if eb.is_interface:
            take_left = (xi < eb.alpha_hat) | ((xi == eb.alpha_hat) & (side == "left"))
            beta = np.where(take_left, self.beta_minus, self.beta_plus)
        else:
            beta = self.beta_minus if eb.mid < self.mesh.alpha else self.beta_plus
        return beta * du

    def node_values(self):
        vals = [self.coeffs[0, 0]]
        vals.extend(self.coeffs[i, 1] for i in range(self.mesh.n_elems))
        return np.asarray(vals)


def solve(system: LinearSystem) -> SolutionField:
    """Direct LU solve with partial pivoting plus a residual acceptance check."""
    A, b = system.matrix, system.rhs
    try:
        with np.errstate(invalid="ignore", divide="ignore"):
            x = sla.solve(A, b)
    except sla.LinAlgError as exc:
        raise SolverError(f"singular system: {exc}") from exc
    if not np.all(np.isfinite(x)):
        raise SolverError("solve produced non-finite entries (singular system)")
    res = float(np.max(np.abs(A @ x - b)))
    bound = 1e-12 * (np.abs(A).sum(axis=1).max() * np.max(np.abs(x), initial=0.0)
                     + np.max(np.abs(b), initial=0.0))
    if res > max(bound, 1e-300):
        raise SolverError(f"solve residual {res:.3e} exceeds bound {bound:.3e}")
    return field_from_vector(system, x)


def field_from_vector(system: LinearSystem, x: np.ndarray) -> SolutionField:
    """Expand an unknown vector into per-element coefficients, boundary data
    included."""
    p, N = system.degree, system.mesh.n_elems
    prob = system.problem
    coeffs = np.zeros((N, p + 1))
    for i in range(1, N + 1):
        for n in range(p + 1):
            dof = system.dof_map.local(i, n)
            if dof == "a":
                coeffs[i - 1, n] = prob.u_a
            elif dof == "b":
                coeffs[i - 1, n] = prob.u_b
            else:
                coeffs[i - 1, n] = x[dof]
    return SolutionField(system.mesh, p, coeffs, system.bases,
                         prob.beta_minus, prob.beta_plus)


def conservation_residual(sol: SolutionField, problem: InterfaceProblem):
    """Flux balance minus source integral on every active control volume."""
    mesh = sol.mesh
    dual = dual_partition(mesh, sol.bases)
    p = sol.degree
    residuals = []
    for vol in dual.volumes:
        bal = sol.eval_flux(vol.lo) - sol.eval_flux(vol.hi)
        cuts = [x for x in mesh.nodes if vol.lo < x < vol.hi]
        if vol.lo < mesh.alpha < vol.hi:
            cuts.append(mesh.alpha)
        if problem.gamma != 0.0 or problem.c != 0.0:
            bal += integrate_split(
                lambda x: np.asarray(
                    [problem.gamma * sol.eval_deriv(xx) + problem.c * sol.eval(xx)
                     for xx in np.atleast_1d(x)]
                ),
                vol.lo, vol.hi, cuts, order=p + 3,
            )
        bal -= integrate_split(problem.source, vol.lo, vol.hi, cuts, order=p + 6)
        residuals.append(bal)
    return residuals
