"""Primal partitions, per-element basis data, and the dual control-volume mesh."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .polynomials import (
    PiecewisePoly,
    QuadRule,
    RefInterface,
    gauss_rule,
    gen_lobatto,
    roots_in,
)

__all__ = ["Mesh", "ElementBasis", "ControlVolume", "DualMesh",
           "build_mesh", "element_basis", "dual_partition"]

# alpha closer than this (relative to the local mesh size) to a node is
# treated as sitting on the node: the scheme degenerates to standard FVM
NODE_COLLISION_REL = 1e-13


@dataclass(frozen=True)
class Mesh:
    """Partition of (a, b) with an optional interface element index k
    (1-based) such that x_{k-1} < alpha < x_k."""

    nodes: tuple
    alpha: float
    interface_elem: int | None

    @property
    def a(self) -> float:
        return self.nodes[0]

    @property
    def b(self) -> float:
        return self.nodes[-1]

    @property
    def n_elems(self) -> int:
        return len(self.nodes) - 1

    def h(self, i: int) -> float:
        return self.nodes[i] - self.nodes[i - 1]

    @property
    def h_max(self) -> float:
        return float(np.max(np.diff(self.nodes)))

    @property
    def shape_ratio(self) -> float:
        dh = np.diff(self.nodes)
        return float(np.max(dh) / np.min(dh))

    def element_interval(self, i: int):
        return self.nodes[i - 1], self.nodes[i]


def build_mesh(a: float, b: float, N: int, alpha: float) -> Mesh:
    """Uniform N-element mesh on (a, b); locates the interface element, or
    leaves it unset when alpha collides with a node."""
    if not a < alpha < b:
        raise ValueError(f"alpha={alpha} must lie strictly inside ({a}, {b})")
    if N < 2:
        raise ValueError("need at least two elements")
    nodes = np.linspace(a, b, N + 1)
    h = (b - a) / N
    if np.min(np.abs(nodes - alpha)) <= NODE_COLLISION_REL * h:
        return Mesh(tuple(nodes), alpha, None)
    k = int(np.searchsorted(nodes, alpha))
    return Mesh(tuple(nodes), alpha, k)


@lru_cache(maxsize=None)
def _ref_element_data(iface: RefInterface, p: int):
    basis = tuple(gen_lobatto(n, iface) for n in range(p + 1))
    rule = gauss_rule(p, iface)
    lob = tuple(roots_in(gen_lobatto(p + 1, iface), -1.0, 1.0))
    return basis, rule, lob


@dataclass(frozen=True)
class ElementBasis:
    """Reference basis, quadrature, and Lobatto points for one element."""

    elem: int
    basis: tuple          # p + 1 PiecewisePoly on [-1, 1]
    gauss: QuadRule       # weights integrate against w = 1/beta on [-1, 1]
    lobatto_pts: tuple    # roots of phi_{p+1}, endpoints included
    is_interface: bool
    alpha_hat: float | None
    x_left: float
    x_right: float
    deriv: tuple = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "deriv", tuple(b.deriv() for b in self.basis))

    @property
    def h(self) -> float:
        return self.x_right - self.x_left

    @property
    def mid(self) -> float:
        return 0.5 * (self.x_left + self.x_right)

    def to_ref(self, x):
        return (2.0 * np.asarray(x, dtype=float) - self.x_left - self.x_right) / self.h

    def to_phys(self, xi):
        return self.mid + 0.5 * self.h * np.asarray(xi, dtype=float)

    @property
    def gauss_phys(self):
        """Physical Gauss points and weights; weights represent the integral
        of F/beta over the element."""
        pts = self.to_phys(np.asarray(self.gauss.points))
        wts = 0.5 * self.h * np.asarray(self.gauss.weights)
        return pts, wts


def element_basis(mesh: Mesh, i: int, p: int,
                  beta_minus: float, beta_plus: float) -> ElementBasis:
    """Per-element reference data: generalized on the interface element,
    standard (equal-beta reduction) elsewhere."""
    if not 1 <= i <= mesh.n_elems:
        raise ValueError(f"element index {i} out of range")
    if p < 1:
        raise ValueError("polynomial degree must be at least 1")
    xl, xr = mesh.element_interval(i)
    if mesh.interface_elem == i:
        alpha_hat = (2.0 * mesh.alpha - xl - xr) / (xr - xl)
        iface = RefInterface(beta_minus, beta_plus, alpha_hat)
        basis, rule, lob = _ref_element_data(iface, p)
        return ElementBasis(i, basis, rule, lob, True, alpha_hat, xl, xr)
    beta = beta_minus if 0.5 * (xl + xr) < mesh.alpha else beta_plus
    iface = RefInterface(beta, beta, 0.0)
    basis, rule, lob = _ref_element_data(iface, p)
    return ElementBasis(i, basis, rule, lob, False, None, xl, xr)


@dataclass(frozen=True)
class ControlVolume:
    """Active dual-mesh volume [g_{i,j}, g_{i,j+1}], owned by element i."""

    elem: int
    j: int
    lo: float
    hi: float


@dataclass(frozen=True)
class DualMesh:
    """Active control volumes plus the two inactive boundary strips."""

    volumes: tuple
    boundary_strips: tuple

    def __len__(self):
        return len(self.volumes)


def dual_partition(mesh: Mesh, bases) -> DualMesh:
    """Dual partition from consecutive (generalized) Gauss points.

    Element i contributes p volumes for i < N and p - 1 for i = N, giving
    Np - 1 active volumes tiling [g_{1,1}, g_{N,p}].
    """
    N = mesh.n_elems
    if len(bases) != N:
        raise ValueError("need one ElementBasis per element")
    p = len(bases[0].basis) - 1
    gpts = [eb.gauss_phys[0] for eb in bases]
    volumes = []
    for i in range(1, N + 1):
        g = gpts[i - 1]
        p_i = p if i < N else p - 1
        for j in range(1, p_i + 1):
            hi = g[j] if j < p else gpts[i][0]
            volumes.append(ControlVolume(i, j, float(g[j - 1]), float(hi)))
    strips = (
        ControlVolume(1, 0, mesh.a, float(gpts[0][0])),
        ControlVolume(N, p, float(gpts[-1][-1]), mesh.b),
    )
    assert len(volumes) == N * p - 1
    return DualMesh(tuple(volumes), strips)
