"""Matplotlib rendering for basis dumps, error profiles, and convergence tables."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["save_basis_figure", "save_profile_figure", "save_convergence_figure"]


def save_basis_figure(dump: dict, path) -> None:
    """Two panels: generalized Lobatto family (left), Legendre family (right)."""
    cols = dump["samples"]
    xi = cols["xi"]
    phi_names = sorted(n for n in cols if n.startswith("phi_"))
    leg_names = sorted(n for n in cols if n.startswith("L_"))
    fig, (ax0, ax1) = plt.subplots(1, 2, figsize=(9, 3.6))
    for name in phi_names:
        ax0.plot(xi, cols[name], label=name.replace("phi_", r"$\phi_{") + "}$")
    for name in leg_names:
        ax1.plot(xi, cols[name], label=name.replace("L_", r"$L_{") + "}$")
    for ax in (ax0, ax1):
        ax.axvline(dump["alpha_hat"], color="k", ls=":", lw=0.8)
        ax.legend(fontsize=8)
        ax.set_xlabel(r"$\xi$")
    ax0.set_title("Lobatto basis")
    ax1.set_title("Legendre basis")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_profile_figure(profile: dict, path) -> None:
    """Solution error with Lobatto points marked, flux error with Gauss points."""
    fig, (ax0, ax1) = plt.subplots(1, 2, figsize=(9, 3.6))
    x, e, fe = profile["x"], profile["error"], profile["flux_error"]
    sol, exact = profile["sol"], profile["exact"]
    ax0.plot(x, e, "b-", lw=0.9)
    lob = profile["lobatto_points"]
    ax0.plot(lob, [sol.eval(v) - exact.value(v) for v in lob], "ro", ms=3)
    ax0.plot([profile["alpha"]], [0.0], "ko", ms=5)
    ax0.set_title("solution error")
    ax1.plot(x, fe, "b-", lw=0.9)
    g = profile["gauss_points"]
    ax1.plot(g, [sol.eval_flux(v) - exact.flux(v) for v in g], "ro", ms=3)
    ax1.plot([profile["alpha"]], [0.0], "ko", ms=5)
    ax1.set_title("flux error")
    for ax in (ax0, ax1):
        ax.set_xlabel("x")
        ax.axhline(0.0, color="0.7", lw=0.6)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_convergence_figure(table, path) -> None:
    """Log-log error plot, one curve per norm, with reference slopes in legend."""
    fig, ax = plt.subplots(figsize=(5, 4))
    inv_h = np.asarray([n for n, _ in table.reports], dtype=float)
    for name in table.config.norms:
        errs = np.asarray([rep.norm(name) for _, rep in table.reports])
        fit = table.rates[name]
        label = name if fit.rate is None else f"{name} (rate {fit.rate:.2f})"
        ax.loglog(inv_h, errs, "o-", ms=3, label=label)
    ax.set_xlabel("1/h")
    ax.set_ylabel("error")
    ax.legend(fontsize=7)
    ax.grid(True, which="both", lw=0.3, alpha=0.5)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
