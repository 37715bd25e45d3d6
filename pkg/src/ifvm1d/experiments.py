"""Configuration-driven experiment runner: convergence tables, basis dumps,
and pointwise error profiles."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .analysis import (
    ErrorReport,
    NORM_NAMES,
    error_report,
    fit_rates,
    manufactured,
)
from .meshing import build_mesh
from .polynomials import RefInterface, gauss_rule, gen_legendre, gen_lobatto, roots_in
from .solver import SolverError, assemble_ifem, assemble_ifvm, solve

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "ExperimentTable",
    "run_experiment",
    "solve_single",
    "dump_basis",
    "dump_profile",
    "parse_number",
    "load_config_file",
    "table_config",
    "TABLE_NUMBERS",
]

NORM_LABELS = {
    "e_N": "norm_N",
    "e_inf": "norm_0inf",
    "e_L": "norm_L",
    "flux_G": "flux_norm_G",
    "e_0": "norm_0",
    "e_1": "seminorm_1",
    "e_P": "norm_P",
}


class ConfigError(ValueError):
    """Invalid experiment configuration."""


def parse_number(token) -> float:
    """Parse a real number; 'pi', 'pi/6', '2*pi/3' style tokens are accepted
    so that irrational interface locations survive config files exactly."""
    if isinstance(token, (int, float)):
        return float(token)
    s = token.strip().lower().replace(" ", "")
    if "pi" not in s:
        try:
            return float(s)
        except ValueError as exc:
            raise ConfigError(f"cannot parse number {token!r}") from exc
    factor = 1.0
    if s.startswith("-"):
        factor = -1.0
        s = s[1:]
    head, _, tail = s.partition("pi")
    try:
        if head.endswith("*"):
            head = head[:-1]
        factor *= float(head) if head else 1.0
        if tail.startswith("/"):
            factor /= float(tail[1:])
        elif tail:
            raise ValueError(tail)
    except ValueError as exc:
        raise ConfigError(f"cannot parse number {token!r}") from exc
    return factor * math.pi


@dataclass(frozen=True)
class ExperimentConfig:
    degree: int = 1
    beta_minus: float = 1.0
    beta_plus: float = 5.0
    alpha: float = math.pi / 6
    gamma: float = 0.0
    c: float = 0.0
    kind: str = "smooth"
    m: int = 2
    mesh: tuple = (8, 16, 32, 64)
    method: str = "ifvm"
    fmt: str = "csv"
    domain: tuple = (0.0, 1.0)

    def __post_init__(self):
        if self.degree < 1:
            raise ConfigError("degree must be a positive integer")
        if self.method not in ("ifvm", "ifem"):
            raise ConfigError(f"unknown method {self.method!r}")
        if self.kind not in ("smooth", "nonsmooth"):
            raise ConfigError(f"unknown solution kind {self.kind!r}")
        if self.fmt not in ("csv", "markdown"):
            raise ConfigError(f"unknown output format {self.fmt!r}")
        if not self.mesh or list(self.mesh) != sorted(set(self.mesh)):
            raise ConfigError("mesh list must be nonempty and strictly increasing")

    @property
    def norms(self):
        """Table schema: the Lobatto-point column only appears for p >= 2."""
        return tuple(n for n in NORM_NAMES if n != "e_L" or self.degree >= 2)


CONFIG_KEYS = {
    "degree": int,
    "beta_minus": parse_number,
    "beta_plus": parse_number,
    "alpha": parse_number,
    "gamma": parse_number,
    "c": parse_number,
    "kind": str,
    "m": int,
    "method": str,
    "fmt": str,
}


def load_config_file(path) -> dict:
    """Flat key=value config file; '#' starts a comment."""
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value")
            key, val = (s.strip() for s in line.split("=", 1))
            if key == "mesh":
                out["mesh"] = tuple(int(t) for t in val.split(","))
            elif key in CONFIG_KEYS:
                out[key] = CONFIG_KEYS[key](val)
            else:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
    return out


def solve_single(config: ExperimentConfig, inv_h: int):
    """Solve one mesh of the configured experiment; returns (field, exact, mesh)."""
    exact = manufactured(config.kind, config.beta_minus, config.beta_plus,
                         alpha=config.alpha, gamma=config.gamma, c=config.c,
                         m=config.m, domain=config.domain)
    problem = exact.as_problem()
    mesh = build_mesh(*config.domain, inv_h, config.alpha)
    assemble = assemble_ifvm if config.method == "ifvm" else assemble_ifem
    system = assemble(problem, mesh, config.degree)
    return solve(system), exact, mesh


@dataclass(frozen=True)
class ExperimentTable:
    config: ExperimentConfig
    reports: tuple            # (inv_h, ErrorReport) pairs
    rates: dict = field(default=None)

    def to_csv(self) -> str:
        cols = self.config.norms
        lines = ["inv_h," + ",".join(NORM_LABELS[c] for c in cols)]
        for inv_h, rep in self.reports:
            lines.append(f"{inv_h}," + ",".join(f"{rep.norm(c):.6e}" for c in cols))
        lines.append("rate," + ",".join(_fmt_rate(self.rates[c]) for c in cols))
        return "\n".join(lines) + "\n"

    def to_markdown(self) -> str:
        cols = self.config.norms
        head = "| 1/h | " + " | ".join(NORM_LABELS[c] for c in cols) + " |"
        sep = "|" + "---|" * (len(cols) + 1)
        lines = [head, sep]
        for inv_h, rep in self.reports:
            lines.append(f"| {inv_h} | "
                         + " | ".join(f"{rep.norm(c):.2e}" for c in cols) + " |")
        lines.append("| rate | "
                     + " | ".join(_fmt_rate(self.rates[c]) for c in cols) + " |")
        return "\n".join(lines) + "\n"

    def render(self) -> str:
        return self.to_csv() if self.config.fmt == "csv" else self.to_markdown()


def _fmt_rate(fit) -> str:
    return "n/a" if fit.rate is None else f"{fit.rate:.2f}"


def run_experiment(config: ExperimentConfig) -> ExperimentTable:
    """One table row per mesh plus a final regression-rate row."""
    reports = []
    for inv_h in config.mesh:
        try:
            sol, exact, mesh = solve_single(config, inv_h)
        except SolverError as exc:
            raise SolverError(f"mesh 1/h={inv_h}: {exc}") from exc
        reports.append((inv_h, error_report(sol, exact, mesh)))
    rates = fit_rates([r for _, r in reports])
    return ExperimentTable(config, tuple(reports), rates)


# pre-baked experiment configurations matching the reference tables; 7/8 are
# aliases of the two nonsmooth studies 9/10
_SMOOTH = dict(beta_minus=1.0, beta_plus=5.0, alpha=math.pi / 6)
_NONSMOOTH_MESH = (8, 16, 32, 64, 128)
TABLE_NUMBERS = (1, 2, 3, 4, 5, 6, 7, 8, 9, 10)


def table_config(number: int) -> ExperimentConfig:
    base = {
        1: dict(degree=1, gamma=0.0, c=0.0, mesh=(8, 16, 32, 64, 128, 256, 512)),
        2: dict(degree=2, gamma=0.0, c=0.0, mesh=(8, 16, 24, 32, 40, 48, 56)),
        3: dict(degree=3, gamma=0.0, c=0.0, mesh=(4, 5, 6, 7, 8, 9)),
        4: dict(degree=1, gamma=1.0, c=1.0, mesh=(8, 16, 32, 64, 128, 256, 512)),
        5: dict(degree=2, gamma=1.0, c=1.0, mesh=(8, 16, 24, 32, 40, 48, 56)),
        6: dict(degree=3, gamma=1.0, c=1.0, mesh=(4, 6, 8, 10, 12, 14, 16, 18)),
        7: dict(degree=2, kind="nonsmooth", m=2, mesh=_NONSMOOTH_MESH),
        8: dict(degree=2, kind="nonsmooth", m=2, mesh=_NONSMOOTH_MESH,
                method="ifem"),
        9: dict(degree=2, kind="nonsmooth", m=2, mesh=_NONSMOOTH_MESH),
        10: dict(degree=2, kind="nonsmooth", m=2, mesh=_NONSMOOTH_MESH,
                 method="ifem"),
    }
    if number not in base:
        raise ConfigError(f"no pre-baked table {number}; choose from 1..10")
    return ExperimentConfig(**_SMOOTH, **base[number])


def dump_basis(p: int, beta_minus: float, beta_plus: float, alpha_hat: float,
               n_samples: int = 401) -> dict:
    """Columnar samples of the generalized Lobatto/Legendre families plus the
    Gauss and Lobatto roots and quadrature weights."""
    iface = RefInterface(beta_minus, beta_plus, alpha_hat)
    xi = np.linspace(-1.0, 1.0, n_samples)
    side = np.where(xi <= alpha_hat, "left", "right")
    cols = {"xi": xi}
    for n in range(p + 1):
        phi = gen_lobatto(n, iface)
        cols[f"phi_{n}"] = np.asarray(
            [phi(x, side=s) for x, s in zip(xi, side)]
        )
        cols[f"L_{n}"] = gen_legendre(n, iface)(xi)
    rule = gauss_rule(p, iface)
    return {
        "samples": cols,
        "gauss_points": list(rule.points),
        "gauss_weights": list(rule.weights),
        "lobatto_points": roots_in(gen_lobatto(p + 1, iface), -1.0, 1.0),
        "alpha_hat": alpha_hat,
    }


def basis_csv(dump: dict) -> str:
    cols = dump["samples"]
    names = list(cols)
    lines = [",".join(names)]
    for row in zip(*(cols[n] for n in names)):
        lines.append(",".join(f"{v:.12e}" for v in row))
    lines.append("# gauss_points," + ",".join(f"{v:.12e}" for v in dump["gauss_points"]))
    lines.append("# gauss_weights," + ",".join(f"{v:.12e}" for v in dump["gauss_weights"]))
    lines.append("# lobatto_points,"
                 + ",".join(f"{v:.12e}" for v in dump["lobatto_points"]))
    return "\n".join(lines) + "\n"


def dump_profile(config: ExperimentConfig, inv_h: int) -> dict:
    """Pointwise error and flux-error samples on the table sampling grid, with
    Gauss/Lobatto locations and the interface marked for plotting."""
    sol, exact, mesh = solve_single(config, inv_h)
    xs, es, fs = [], [], []
    for i in range(1, mesh.n_elems + 1):
        eb = sol.bases[i - 1]
        if eb.is_interface:
            panels = [(np.linspace(eb.x_left, mesh.alpha, 10), "left"),
                      (np.linspace(mesh.alpha, eb.x_right, 10), "right")]
        else:
            panels = [(np.linspace(eb.x_left, eb.x_right, 10), "right")]
        for pts, side in panels:
            xi = eb.to_ref(pts)
            xs.extend(pts)
            es.extend(sol.eval_on_element(i, xi, side=side)
                      - exact.value(pts, side=side))
            fs.extend(sol.flux_on_element(i, xi, side=side)
                      - exact.flux(pts, side=side))
    gauss, lob = [], []
    for i in range(1, mesh.n_elems + 1):
        eb = sol.bases[i - 1]
        gauss.extend(eb.to_phys(np.asarray(eb.gauss.points)))
        lob.extend(eb.to_phys(np.asarray(eb.lobatto_pts)))
    return {
        "x": np.asarray(xs),
        "error": np.asarray(es),
        "flux_error": np.asarray(fs),
        "gauss_points": np.asarray(gauss),
        "lobatto_points": np.asarray(sorted(set(np.round(lob, 15)))),
        "alpha": mesh.alpha,
        "sol": sol,
        "exact": exact,
    }


def profile_csv(profile: dict) -> str:
    lines = ["x,error,flux_error"]
    for x, e, f in zip(profile["x"], profile["error"], profile["flux_error"]):
        lines.append(f"{x:.12e},{e:.12e},{f:.12e}")
    lines.append("# gauss_points,"
                 + ",".join(f"{v:.12e}" for v in profile["gauss_points"]))
    lines.append("# lobatto_points,"
                 + ",".join(f"{v:.12e}" for v in profile["lobatto_points"]))
    lines.append(f"# interface,{profile['alpha']:.12e}")
    return "\n".join(lines) + "\n"
