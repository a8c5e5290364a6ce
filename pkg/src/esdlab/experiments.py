"""Named, reproducible experiments and their configuration.

Each ``run_*`` function is a pure function of an :class:`ExperimentConfig`:
it computes every trial (optionally on a thread pool; the compiled kernels
release the GIL), then a single collector writes CSV/SVG files in a fixed
order. Every CSV starts with ``# config-sha256=<hash> <config>`` followed by
a header row.
"""

from __future__ import annotations

import hashlib
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .eigen import Spectrum, eigenvalues
from .ensembles import CLI_NAMES, NoiseEnsemble, NoiseMatrixSpec, sample_noise_matrix
from .esd import DIRAC_ZERO, UNIT_CIRCLE, ESD, radial_cdf_distance, radial_transport_distance
from .matrix import BlockSpec, ComplexMatrix, add_scaled, build_tbn, dump_matrix, shift
from .replacement import DEFAULT_Z_GRID, replacement_diagnostic
from .stability import (RowSet, all_rows_report, check_mainthm_hypotheses,
                        closed_form_all_rows, closed_form_superdiag, epsilon_stability,
                        superdiag_row_distances, verify_manystable)
from .svg import render_scatter

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "EXPERIMENTS",
    "resolve_b",
    "perturbed_matrix",
    "perturbed_spectrum",
    "angular_chi2",
    "block_trials",
    "run_experiment",
]

EXPERIMENTS = ("figure1", "small-blocks", "large-blocks", "stability", "replacement", "manystable")
CHI2_8BIN_CRIT = 24.322  # chi-square(7) upper 0.001 quantile


class ConfigError(ValueError):
    """Invalid experiment configuration (CLI exit code 2)."""


def _parse_complex(tok: str) -> complex:
    try:
        return complex(tok.strip().replace(" ", "").replace("i", "j"))
    except ValueError as exc:
        raise ConfigError(f"bad complex number {tok!r}") from exc


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    n: tuple[int, ...]
    b: str = "n-minus-1"
    gamma: float = 2.0
    ensembles: tuple[str, ...] = ("cgauss",)
    seeds: int = 20
    seed_base: int = 0
    z_grid: tuple[complex, ...] | None = None
    output: str = "out"
    jobs: int = field(default=1, compare=False)  # jobs and output are not hashed

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        if not self.n:
            raise ConfigError("empty n ladder")
        if any(k < 2 for k in self.n):
            raise ConfigError("every n must be at least 2")
        if any(a >= b for a, b in zip(self.n, self.n[1:])):
            raise ConfigError("n ladder must be strictly increasing")
        for e in self.ensembles:
            if e not in CLI_NAMES:
                raise ConfigError(f"unknown ensemble {e!r}; choose from {sorted(CLI_NAMES)}")
        if not self.ensembles:
            raise ConfigError("no ensembles configured")
        if self.seeds < 1:
            raise ConfigError("at least one seed is required")
        if not (self.gamma >= 0):
            raise ConfigError("gamma must be non-negative")
        if self.jobs < 1:
            raise ConfigError("jobs must be positive")
        for k in self.n:
            try:
                resolve_b(self.b, k)
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc
        if self.z_grid is not None:
            for z in self.z_grid:
                if abs(abs(z) - 1.0) < 1e-12:
                    raise ConfigError(f"z-grid entry {z} lies on the unit circle")
        if self.experiment == "replacement" and len(self.ensembles) != 2:
            raise ConfigError("replacement needs exactly two ensembles")

    @property
    def seed_list(self) -> tuple[int, ...]:
        return tuple(self.seed_base + i for i in range(self.seeds))

    def canonical(self) -> str:
        parts = []
        for f in fields(self):
            if f.name in ("jobs", "output"):
                continue
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                v = ",".join(_fmt(x) for x in v)
            elif v is None:
                v = "default"
            else:
                v = _fmt(v)
            parts.append(f"{f.name}={v}")
        return ";".join(parts)

    def sha256(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()

    def comment(self) -> str:
        return f"# config-sha256={self.sha256()} {self.canonical()}"

    # -------------------------------------------------------------- parsing

    @classmethod
    def defaults(cls, experiment: str) -> dict:
        base = {
            "figure1": dict(n=(50, 500), gamma=10.0, ensembles=("cgauss",), seeds=5),
            "small-blocks": dict(n=(128, 256, 512), b="fixed:2", ensembles=("cgauss",)),
            "large-blocks": dict(n=(128, 256, 512), b="n-minus-1", ensembles=("bern",)),
            "stability": dict(n=(40,), b="fixed:4", seeds=1),
            "replacement": dict(n=(100, 200, 400), ensembles=("cgauss", "bern")),
            "manystable": dict(n=(256,), z_grid=(0j, 2 + 0j)),
        }
        if experiment not in base:
            raise ConfigError(f"unknown experiment {experiment!r}")
        return base[experiment]

    @classmethod
    def build(cls, experiment: str, overrides: dict | None = None) -> "ExperimentConfig":
        values = dict(cls.defaults(experiment))
        for k, v in (overrides or {}).items():
            if v is not None:
                values[k] = v
        values["experiment"] = experiment
        try:
            return cls(**values)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @staticmethod
    def parse_pairs(text: str) -> dict:
        """Parse ``key=value`` lines (``#`` comments allowed) into typed overrides."""
        out: dict = {}
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"expected key=value, got {raw!r}")
            key, val = (s.strip() for s in line.split("=", 1))
            key = key.replace("-", "_")
            out[key] = parse_value(key, val)
        return out


def parse_value(key: str, val: str):
    try:
        if key == "n":
            return tuple(int(x) for x in val.split(",") if x.strip())
        if key == "gamma":
            return float(val)
        if key in ("seeds", "seed_base", "jobs"):
            return int(val)
        if key == "ensembles":
            return tuple(x.strip() for x in val.split(",") if x.strip())
        if key == "z_grid":
            return tuple(_parse_complex(x) for x in val.split(",") if x.strip())
        if key in ("b", "output", "experiment"):
            return val
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {val!r}") from exc
    raise ConfigError(f"unknown config key {key!r}")


def _fmt(x) -> str:
    if isinstance(x, complex):
        return f"{x.real:.17g}{x.imag:+.17g}j"
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def resolve_b(rule: str, n: int) -> int:
    """Block parameter for dimension ``n`` under a named rule."""
    if rule == "n-minus-1":
        b = n - 1
    elif rule == "sqrt-n":
        b = int(math.isqrt(n))
    elif rule == "loglog-n":
        b = max(1, int(math.floor(math.log(math.log(n))))) if n > 2 else 1
    elif rule.startswith("fixed:"):
        try:
            b = int(rule.split(":", 1)[1])
        except ValueError as exc:
            raise ValueError(f"bad block rule {rule!r}") from exc
    else:
        raise ValueError(f"unknown block rule {rule!r}")
    if not 1 <= b <= n - 1:
        raise ValueError(f"block rule {rule!r} gives b={b}, outside [1, {n - 1}] for n={n}")
    return b


# ------------------------------------------------------------- trial core


def perturbed_matrix(M, gamma: float, ensemble: str, seed: int) -> ComplexMatrix:
    """``M + n^-gamma Phi`` with ``Phi`` drawn from ``ensemble`` under ``seed``."""
    n = M.n if isinstance(M, ComplexMatrix) else len(M)
    noise = sample_noise_matrix(NoiseMatrixSpec(n, gamma, NoiseEnsemble(ensemble), seed))
    return add_scaled(M, noise, 1.0)


def perturbed_spectrum(M, gamma: float, ensemble: str, seed: int) -> Spectrum:
    return eigenvalues(perturbed_matrix(M, gamma, ensemble, seed))


def parallel_map(fn: Callable, items: Sequence, jobs: int = 1) -> list:
    """Ordered map, on a thread pool when ``jobs > 1``."""
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def angular_chi2(atoms, bins: int = 8) -> float:
    """Pearson chi-square of eigenvalue arguments against uniform bins."""
    a = np.asarray(atoms)
    if a.size == 0:
        return 0.0
    theta = np.mod(np.angle(a), 2 * np.pi)
    counts = np.bincount(np.minimum((theta / (2 * np.pi) * bins).astype(int), bins - 1),
                         minlength=bins)
    expected = a.size / bins
    return float(np.sum((counts - expected) ** 2) / expected)


@dataclass(frozen=True)
class BlockTrial:
    n: int
    b: int
    ensemble: str
    seed: int
    atoms: np.ndarray
    converged: bool

    @property
    def esd(self) -> ESD:
        return ESD(self.atoms)


def block_trials(ns: Iterable[int], b_rule: str, gamma: float, ensembles: Iterable[str],
                 seeds: Iterable[int], jobs: int = 1) -> list[BlockTrial]:
    """Spectra of ``T_{b,n} + n^-gamma Phi`` over the full (n, ensemble, seed) grid."""
    tasks = [(n, e, s) for n in ns for e in ensembles for s in seeds]

    def one(task):
        n, e, s = task
        b = resolve_b(b_rule, n)
        spec = perturbed_spectrum(build_tbn(BlockSpec(n, b)), gamma, e, s)
        return BlockTrial(n, b, e, s, spec.eigenvalues, spec.converged)

    return parallel_map(one, tasks, jobs)


# --------------------------------------------------------------- writers


class _Writer:
    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        self.root = Path(cfg.output)
        self.root.mkdir(parents=True, exist_ok=True)
        self.paths: list[Path] = []

    def csv(self, name: str, header: str, rows: Iterable[str]) -> Path:
        p = self.root / name
        body = [self.cfg.comment(), header, *rows]
        p.write_text("\n".join(body) + "\n", encoding="utf-8")
        self.paths.append(p)
        return p

    def raw(self, name: str, text: str) -> Path:
        """Prefix a pre-rendered CSV (with its own header) by the config comment."""
        p = self.root / name
        p.write_text(self.cfg.comment() + "\n" + text, encoding="utf-8")
        self.paths.append(p)
        return p

    def svg(self, name: str, atoms, title: str) -> Path:
        p = render_scatter(atoms, self.root / name, True, title)
        self.paths.append(p)
        return p


def _g(x: float) -> str:
    return f"{x:.17g}"


@dataclass
class Artifacts:
    config: ExperimentConfig
    paths: list[Path]
    summary: list[dict]
    notes: list[str] = field(default_factory=list)


def run_figure1(cfg: ExperimentConfig) -> Artifacts:
    trials = block_trials(cfg.n, "n-minus-1", cfg.gamma, cfg.ensembles, cfg.seed_list, cfg.jobs)
    w = _Writer(cfg)
    summary = []
    for n in cfg.n:
        for e in cfg.ensembles:
            group = [t for t in trials if t.n == n and t.ensemble == e]
            rows = [f"{t.seed},{_g(x.real)},{_g(x.imag)},{int(t.converged)}"
                    for t in group for x in t.atoms]
            w.csv(f"figure1_n{n}_{e}.csv", "seed,re,im,converged", rows)
            w.svg(f"figure1_n{n}_{e}.svg", group[0].atoms,
                  f"T_{n} + {n}^-{_fmt(cfg.gamma)} X, {e}, seed {group[0].seed}")
            gap = float(np.median(np.abs(np.abs(np.concatenate([t.atoms for t in group])) - 1.0)))
            summary.append(dict(n=n, ensemble=e, median_modulus_gap=gap,
                                nonconverged=sum(not t.converged for t in group)))
    w.csv("figure1_summary.csv", "n,ensemble,median_abs_modulus_minus_1,nonconverged_trials",
          [f"{s['n']},{s['ensemble']},{_g(s['median_modulus_gap'])},{s['nonconverged']}" for s in summary])
    return Artifacts(cfg, w.paths, summary)


def _radial_experiment(cfg: ExperimentConfig, reference, ref_name: str, tag: str) -> Artifacts:
    trials = block_trials(cfg.n, cfg.b, cfg.gamma, cfg.ensembles, cfg.seed_list, cfg.jobs)
    w = _Writer(cfg)
    rows, summary = [], []
    for t in trials:
        mu = t.esd
        rows.append(f"{t.n},{t.b},{t.ensemble},{t.seed},{_g(radial_cdf_distance(mu, reference))},"
                    f"{_g(radial_transport_distance(mu, reference))},{_g(angular_chi2(t.atoms))},"
                    f"{int(t.converged)}")
    w.csv(f"{tag}_trials.csv",
          f"n,b,ensemble,seed,radial_cdf_{ref_name},radial_transport_{ref_name},angular_chi2,converged",
          rows)
    for n in cfg.n:
        for e in cfg.ensembles:
            group = [t for t in trials if t.n == n and t.ensemble == e]
            ks = [radial_cdf_distance(t.esd, reference) for t in group]
            w1 = [radial_transport_distance(t.esd, reference) for t in group]
            chi = [angular_chi2(t.atoms) for t in group]
            summary.append(dict(n=n, b=group[0].b, ensemble=e, median_radial_cdf=float(np.median(ks)),
                                median_radial_transport=float(np.median(w1)),
                                chi2_pass=sum(c < CHI2_8BIN_CRIT for c in chi), trials=len(group),
                                nonconverged=sum(not t.converged for t in group)))
    w.csv(f"{tag}_summary.csv",
          "n,b,ensemble,median_radial_cdf,median_radial_transport,angular_chi2_pass,trials,nonconverged_trials",
          [f"{s['n']},{s['b']},{s['ensemble']},{_g(s['median_radial_cdf'])},"
           f"{_g(s['median_radial_transport'])},{s['chi2_pass']},{s['trials']},{s['nonconverged']}"
           for s in summary])
    return Artifacts(cfg, w.paths, summary)


def run_small_blocks(cfg: ExperimentConfig) -> Artifacts:
    if cfg.b.startswith("fixed:"):
        warnings.warn("fixed block size: accepted, any constant b is o(log n)", stacklevel=2)
    elif cfg.b != "loglog-n":
        warnings.warn(f"block rule {cfg.b!r} is not o(log n); the point-mass limit need not apply",
                      stacklevel=2)
    return _radial_experiment(cfg, DIRAC_ZERO, "dirac0", "small_blocks")


def run_large_blocks(cfg: ExperimentConfig) -> Artifacts:
    if cfg.b not in ("n-minus-1", "sqrt-n"):
        warnings.warn(f"block rule {cfg.b!r} may not grow faster than log n", stacklevel=2)
    return _radial_experiment(cfg, UNIT_CIRCLE, "circle", "large_blocks")


def _superdiag_rows(spec: BlockSpec) -> list[int]:
    sd = spec.superdiagonal()
    return [i for i in range(spec.n - 1) if sd[i]]


def run_stability_report(cfg: ExperimentConfig) -> Artifacts:
    z_grid = cfg.z_grid if cfg.z_grid is not None else DEFAULT_Z_GRID
    w = _Writer(cfg)
    summary, rows, mrows = [], [], []
    for n in cfg.n:
        spec = BlockSpec(n, resolve_b(cfg.b, n))
        T = build_tbn(spec)
        for z in z_grid:
            A = shift(T, z)
            sd_idx = _superdiag_rows(spec)
            sd = epsilon_stability(RowSet.from_matrix(A, sd_idx))
            sd_exact = min(float(superdiag_row_distances(z, s - 1).min())
                           for s in spec.block_sizes if s > 1)
            al = epsilon_stability(RowSet.from_matrix(A))
            al_exact = all_rows_report(spec, z).epsilon
            entry = dict(n=n, b=spec.b, z=complex(z), superdiag_size=len(sd_idx),
                         superdiag_numeric=sd.epsilon, superdiag_exact=sd_exact,
                         superdiag_bound=closed_form_superdiag(z),
                         all_numeric=al.epsilon, all_exact=al_exact,
                         all_bound=closed_form_all_rows(z, spec.b))
            summary.append(entry)
            rows.append(",".join([str(n), str(spec.b), _g(z.real), _g(z.imag), str(len(sd_idx)),
                                  _g(sd.epsilon), _g(sd_exact), _g(entry["superdiag_bound"]),
                                  _g(al.epsilon), _g(al_exact), _g(entry["all_bound"])]))
            tag = f"n{n}_b{spec.b}_z{z.real:+.4f}{z.imag:+.4f}i"
            w.raw(f"stability_superdiag_{tag}.csv", sd.to_csv())
            w.raw(f"stability_allrows_{tag}.csv", al.to_csv())
        gamma = cfg.gamma if cfg.gamma > 1.5 else 2.0
        for h in check_mainthm_hypotheses(T, gamma, z_grid):
            mrows.append(",".join([str(n), str(spec.b), _fmt(gamma), _g(h.z.real), _g(h.z.imag),
                                   str(h.full_size), _g(h.full_epsilon), _g(h.full_ratio),
                                   str(h.size), _g(h.epsilon), _g(h.ratio), str(int(h.satisfied))]))
    w.csv("stability_summary.csv",
          "n,b,z_re,z_im,superdiag_rows,superdiag_eps_numeric,superdiag_eps_exact,superdiag_eps_bound,"
          "all_eps_numeric,all_eps_exact,all_eps_bound", rows)
    w.csv("stability_mainthm.csv",
          "n,b,gamma,z_re,z_im,full_size,full_epsilon,full_ratio,size,epsilon,ratio,satisfied", mrows)
    return Artifacts(cfg, w.paths, summary)


def run_replacement(cfg: ExperimentConfig) -> Artifacts:
    z_grid = cfg.z_grid if cfg.z_grid is not None else DEFAULT_Z_GRID
    ea, eb = (NoiseEnsemble(e) for e in cfg.ensembles)
    inside = cfg.gamma > 1.5
    label = "within theorem hypotheses" if inside else "outside theorem hypotheses"
    w = _Writer(cfg)

    def one(n):
        b = resolve_b(cfg.b, n)
        return replacement_diagnostic(build_tbn(BlockSpec(n, b)), cfg.gamma, ea, eb,
                                      z_grid, cfg.seed_list)

    diags = parallel_map(one, list(cfg.n), cfg.jobs)
    summary = []
    for d in diags:
        w.raw(f"replacement_n{d.n}.csv", d.to_csv())
        w.csv(f"replacement_condi_n{d.n}.csv", "seed,frob_sq_over_n_a,frob_sq_over_n_b",
              [f"{s},{_g(a)},{_g(b)}" for s, (a, b) in zip(d.seeds, d.cond_i)])
    med = np.array([d.median_gaps() for d in diags])  # (len(n), len(z))
    rows = []
    for j, z in enumerate(z_grid):
        col = med[:, j]
        dec = bool(np.all(np.diff(col) < 0))
        summary.append(dict(z=z, medians=tuple(col), decreasing=dec))
        rows.append(",".join([_g(z.real), _g(z.imag), *(_g(v) for v in col), str(int(dec)), label]))
    singular = sum(d.singular_count for d in diags)
    w.csv("replacement_summary.csv",
          "z_re,z_im," + ",".join(f"median_gap_n{n}" for n in cfg.n) + ",decreasing,regime", rows)
    notes = [label, f"singular trials excluded: {singular}"]
    return Artifacts(cfg, w.paths, summary, notes)


def run_manystable(cfg: ExperimentConfig) -> Artifacts:
    z_grid = cfg.z_grid if cfg.z_grid is not None else (0j, 2 + 0j)
    tasks = [(n, e, z, s) for n in cfg.n for e in cfg.ensembles for z in z_grid for s in cfg.seed_list]
    reps = parallel_map(lambda t: (t[1], verify_manystable(t[0], NoiseEnsemble(t[1]), t[2], t[3])),
                        tasks, cfg.jobs)
    w = _Writer(cfg)
    rows = [f"{r.n},{e},{_g(r.z.real)},{_g(r.z.imag)},{r.seed},{r.rows_tested},{_g(r.threshold)},"
            f"{_g(r.min_distance)},{int(r.passed)}" for e, r in reps]
    w.csv("manystable_trials.csv", "n,ensemble,z_re,z_im,seed,rows_tested,threshold,min_distance,passed",
          rows)
    summary = []
    for n in cfg.n:
        for e in cfg.ensembles:
            for z in z_grid:
                g = [r for ee, r in reps if r.n == n and ee == e and r.z == z]
                summary.append(dict(n=n, ensemble=e, z=z, passed=sum(r.passed for r in g), trials=len(g)))
    w.csv("manystable_summary.csv", "n,ensemble,z_re,z_im,passed,trials",
          [f"{s['n']},{s['ensemble']},{_g(s['z'].real)},{_g(s['z'].imag)},{s['passed']},{s['trials']}"
           for s in summary])
    return Artifacts(cfg, w.paths, summary)


RUNNERS = {
    "figure1": run_figure1,
    "small-blocks": run_small_blocks,
    "large-blocks": run_large_blocks,
    "stability": run_stability_report,
    "replacement": run_replacement,
    "manystable": run_manystable,
}


def run_experiment(cfg: ExperimentConfig) -> Artifacts:
    return RUNNERS[cfg.experiment](cfg)


def first_matrix(cfg: ExperimentConfig) -> ComplexMatrix:
    """The first perturbed matrix an experiment builds (for ``--dump-matrix``)."""
    n = cfg.n[0]
    if cfg.experiment == "manystable":
        return sample_noise_matrix(NoiseMatrixSpec(n, 0.0, NoiseEnsemble(cfg.ensembles[0]),
                                                   cfg.seed_list[0]))
    rule = "n-minus-1" if cfg.experiment == "figure1" else cfg.b
    T = build_tbn(BlockSpec(n, resolve_b(rule, n)))
    if cfg.experiment == "stability":
        return T
    return perturbed_matrix(T, cfg.gamma, cfg.ensembles[0], cfg.seed_list[0])


def write_matrix(cfg: ExperimentConfig, path) -> Path:
    p = Path(path)
    with p.open("w", encoding="utf-8") as fh:
        dump_matrix(first_matrix(cfg), fh)
    return p

