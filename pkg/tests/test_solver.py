"""Tests for assembly, degrees of freedom, the direct solve, and the
conservation property of the scheme."""
import math

import numpy as np
import pytest

from ifvm1d.analysis import manufactured
from ifvm1d.meshing import build_mesh
from ifvm1d.solver import (
    DofMap,
    SolverError,
    assemble_ifem,
    assemble_ifvm,
    conservation_residual,
    solve,
)

ALPHA = math.pi / 6


def smooth_problem(gamma=0.0, c=0.0, bm=1.0, bp=5.0):
    return manufactured("smooth", bm, bp, gamma=gamma, c=c)


class TestDofMap:
    def test_size(self):
        assert DofMap(8, 2).size == 15
        assert DofMap(8, 1).size == 7

    def test_node_numbering(self):
        dofs = DofMap(8, 3)
        assert dofs.node(0) == "a"
        assert dofs.node(8) == "b"
        assert dofs.node(1) == 2
        assert dofs.node(7) == 20

    def test_local_numbering(self):
        dofs = DofMap(8, 3)
        # element 2: left node, right node, then its two interior modes
        assert dofs.local(2, 0) == dofs.node(1)
        assert dofs.local(2, 1) == dofs.node(2)
        assert dofs.local(2, 2) == 3
        assert dofs.local(2, 3) == 4

    @pytest.mark.parametrize("N,p", [(4, 1), (8, 2), (6, 3)])
    def test_local_covers_all_indices(self, N, p):
        dofs = DofMap(N, p)
        seen = set()
        for i in range(1, N + 1):
            for n in range(p + 2 if p >= 1 else 2):
                if n > p:
                    continue
                idx = dofs.local(i, n)
                if isinstance(idx, int):
                    seen.add(idx)
        assert seen == set(range(dofs.size))


class TestAssembleIFVM:
    def test_matrix_shape_and_bandwidth(self):
        exact = smooth_problem()
        mesh = build_mesh(0.0, 1.0, 8, ALPHA)
        sys_ = assemble_ifvm(exact.as_problem(), mesh, 2)
        n = sys_.dof_map.size
        assert sys_.matrix.shape == (n, n)
        # element-ordered numbering keeps the band at 2p + 1
        i, j = np.nonzero(sys_.matrix)
        assert np.max(np.abs(i - j)) <= 2 * sys_.degree + 1

    def test_incompatible_interface_raises(self):
        exact = smooth_problem()
        mesh = build_mesh(0.0, 1.0, 8, 0.3)
        with pytest.raises(ValueError):
            assemble_ifvm(exact.as_problem(), mesh, 1)

    def test_degenerates_to_standard_fvm_matrix(self):
        """With the interface on a node, the p = 1 system must coincide with
        the classical vertex-centered finite volume matrix."""
        exact = manufactured("smooth", 1.0, 5.0, alpha=0.5)
        mesh = build_mesh(0.0, 1.0, 8, 0.5)
        assert mesh.interface_elem is None
        sys_ = assemble_ifvm(exact.as_problem(), mesh, 1)
        N, h = 8, 0.125
        beta = [1.0 if (i - 0.5) * h < 0.5 else 5.0 for i in range(1, N + 1)]
        ref = np.zeros((N - 1, N - 1))
        for i in range(1, N):     # one row per interior node
            r = i - 1
            ref[r, r] = (beta[i - 1] + beta[i]) / h
            if r > 0:
                ref[r, r - 1] = -beta[i - 1] / h
            if r < N - 2:
                ref[r, r + 1] = -beta[i] / h
        assert np.max(np.abs(sys_.matrix - ref)) < 1e-12


class TestSolve:
    @pytest.mark.parametrize("p", (1, 2, 3))
    def test_converges_pointwise(self, p):
        exact = smooth_problem(gamma=1.0, c=1.0)
        mesh = build_mesh(0.0, 1.0, 16, ALPHA)
        sol = solve(assemble_ifvm(exact.as_problem(), mesh, p))
        xs = np.linspace(0.01, 0.99, 37)
        err = max(abs(sol.eval(x) - exact.value(x)) for x in xs)
        assert err < (5e-3, 5e-5, 5e-7)[p - 1]

    def test_dirichlet_values_are_exact(self):
        exact = smooth_problem()
        mesh = build_mesh(0.0, 1.0, 8, ALPHA)
        sol = solve(assemble_ifvm(exact.as_problem(), mesh, 2))
        assert sol.eval(0.0) == pytest.approx(exact.value(0.0), abs=1e-14)
        assert sol.eval(1.0) == pytest.approx(exact.value(1.0), abs=1e-14)

    def test_flux_continuous_at_interface(self):
        exact = smooth_problem()
        mesh = build_mesh(0.0, 1.0, 8, ALPHA)
        sol = solve(assemble_ifvm(exact.as_problem(), mesh, 3))
        fl = sol.eval_flux(ALPHA, side="left")
        fr = sol.eval_flux(ALPHA, side="right")
        assert fl == pytest.approx(fr, rel=1e-11)

    def test_singular_system_raises(self):
        exact = smooth_problem()
        mesh = build_mesh(0.0, 1.0, 8, ALPHA)
        sys_ = assemble_ifvm(exact.as_problem(), mesh, 1)
        sys_.matrix[:] = 0.0
        with pytest.raises(SolverError):
            solve(sys_)

    def test_permutation_invariance(self):
        """Solving the row/column-permuted system and mapping back gives the
        same unknown vector to machine precision."""
        exact = smooth_problem(gamma=1.0, c=1.0)
        mesh = build_mesh(0.0, 1.0, 8, ALPHA)
        sys_ = assemble_ifvm(exact.as_problem(), mesh, 2)
        import scipy.linalg as sla
        x = sla.solve(sys_.matrix, sys_.rhs)
        rng = np.random.default_rng(7)
        perm = rng.permutation(sys_.dof_map.size)
        P = np.eye(sys_.dof_map.size)[perm]
        y = sla.solve(P @ sys_.matrix @ P.T, P @ sys_.rhs)
        assert np.max(np.abs(P.T @ y - x)) < 1e-12 * max(np.max(np.abs(x)), 1.0)


class TestConservation:
    @pytest.mark.parametrize("p", (1, 2, 3))
    def test_flux_balance_holds_per_volume(self, p):
        exact = smooth_problem(gamma=1.0, c=1.0)
        mesh = build_mesh(0.0, 1.0, 8, ALPHA)
        sol = solve(assemble_ifvm(exact.as_problem(), mesh, p))
        res = conservation_residual(sol, exact.as_problem())
        scale = max(abs(sol.eval_flux(v)) for v in np.linspace(0.05, 0.95, 19))
        assert max(abs(r) for r in res) < 1e-12 * max(scale, 1.0)

    def test_galerkin_solution_is_not_conservative(self):
        # the reference Galerkin solver does not satisfy the per-volume
        # balance, which is exactly what distinguishes the two methods
        exact = smooth_problem()
        mesh = build_mesh(0.0, 1.0, 8, ALPHA)
        sol = solve(assemble_ifem(exact.as_problem(), mesh, 2))
        res = conservation_residual(sol, exact.as_problem())
        assert max(abs(r) for r in res) > 1e-9


class TestAssembleIFEM:
    def test_diffusion_matrix_is_symmetric(self):
        exact = smooth_problem()
        mesh = build_mesh(0.0, 1.0, 8, ALPHA)
        sys_ = assemble_ifem(exact.as_problem(), mesh, 2)
        assert np.max(np.abs(sys_.matrix - sys_.matrix.T)) < 1e-12

    def test_nodal_exactness_for_diffusion(self):
        # Galerkin on this trial space reproduces the exact solution at the
        # nodes up to roundoff when gamma = c = 0
        exact = smooth_problem()
        mesh = build_mesh(0.0, 1.0, 8, ALPHA)
        sol = solve(assemble_ifem(exact.as_problem(), mesh, 2))
        nodes = np.asarray(mesh.nodes)
        err = np.max(np.abs(sol.node_values() - exact.value(nodes)))
        assert err < 1e-12

    @pytest.mark.parametrize("p", (1, 2))
    def test_converges_pointwise(self, p):
        exact = smooth_problem(gamma=1.0, c=1.0)
        mesh = build_mesh(0.0, 1.0, 16, ALPHA)
        sol = solve(assemble_ifem(exact.as_problem(), mesh, p))
        xs = np.linspace(0.01, 0.99, 37)
        err = max(abs(sol.eval(x) - exact.value(x)) for x in xs)
        assert err < (5e-3, 5e-5)[p - 1]


class TestSolutionField:
    def test_node_values_match_eval(self):
        exact = smooth_problem()
        mesh = build_mesh(0.0, 1.0, 8, ALPHA)
        sol = solve(assemble_ifvm(exact.as_problem(), mesh, 2))
        nv = sol.node_values()
        for i, x in enumerate(mesh.nodes):
            side = "left" if x == 1.0 else "right"
            assert nv[i] == pytest.approx(sol.eval(x, side=side), abs=1e-13)

    def test_eval_outside_domain_raises(self):
        exact = smooth_problem()
        mesh = build_mesh(0.0, 1.0, 8, ALPHA)
        sol = solve(assemble_ifvm(exact.as_problem(), mesh, 1))
        with pytest.raises(ValueError):
            sol.eval(1.5)

    def test_vectorized_eval_matches_scalar(self):
        exact = smooth_problem()
        mesh = build_mesh(0.0, 1.0, 8, ALPHA)
        sol = solve(assemble_ifvm(exact.as_problem(), mesh, 3))
        i = 3
        eb = sol.bases[i - 1]
        xi = np.linspace(-0.9, 0.9, 7)
        vec = sol.eval_on_element(i, xi)
        scal = [sol.eval(float(eb.to_phys(x))) for x in xi]
        assert np.allclose(vec, scal, atol=1e-13)
