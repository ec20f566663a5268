"""End-to-end DSM -> Bayes reconstruction, error metrics and artifact emission."""

import hashlib
import json
import os
import time
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from . import _backend
from . import dsm as dsm_mod
from .errors import ConfigError, DomainError, StageError
from .expansion import (BasisIndex, CoefficientVector, assemble_forward_operator, basis_matrix,
                        operator_mesh)
from .forward import (DEFAULT_H, DETERMINISTIC, Aperture, aperture, generate_dataset, perturb,
                      save_farfield, wavenumber_range)
from .geometry import Disc, Ellipse, Square
from .mcmc import LITERAL, LikelihoodSpec, PriorSpec, run_chain, save_chain, save_summary, summarize
from .sources import build_mesh, evaluate_source, example_source, source_values_on

DEFAULT_GAMMA = {"G1": 0.41, "G2": 0.64, "G3": 0.70}
FIELD_GRID = 101


@dataclass
class ExperimentConfig:
    """All knobs of one reconstruction; defaults are the published settings."""

    example: int = 1
    source: object = None
    aperture: object = "G1"
    dsm_wavenumbers: tuple = (1.0, 2.0, 3.0)
    bayes_wavenumbers: tuple = tuple(wavenumber_range(1, 20))
    gamma: float = None
    disc_mode: str = dsm_mod.ORIGIN
    indicator_form: str = dsm_mod.COHERENT
    normalize_indicator: bool = True
    grid_lo: float = -4.0
    grid_hi: float = 4.0
    grid_count: int = 81
    disc_override: object = None
    M: int = 5
    N: int = 2
    prior_var: float = 0.01
    sigma: float = 0.04
    beta: float = 0.001
    steps: int = 120_000
    burn_in: int = 20_000
    thin: int = 1
    proposal: str = LITERAL
    seed: int = 0
    noise_mode: str = DETERMINISTIC
    noise_level: float = 0.03
    h_data: float = DEFAULT_H
    h_operator: float = DEFAULT_H
    h_eval: float = DEFAULT_H
    bins: int = 50
    threads: int = None
    output_dir: object = None

    def resolved_source(self):
        if self.source is not None:
            return self.source
        if self.example is None:
            raise ConfigError("either example or source must be given")
        return example_source(int(self.example))

    def resolved_aperture(self):
        if isinstance(self.aperture, Aperture):
            return self.aperture
        if isinstance(self.aperture, str):
            return aperture(self.aperture)
        return Aperture(np.asarray(self.aperture, dtype=np.float64))

    def resolved_gamma(self):
        if self.gamma is not None:
            return float(self.gamma)
        name = self.resolved_aperture().name
        if name not in DEFAULT_GAMMA:
            raise ConfigError("gamma is required for a custom aperture")
        return DEFAULT_GAMMA[name]

    def validate(self):
        if not (self.steps > self.burn_in >= 0 and self.thin >= 1):
            raise ConfigError("need steps > burn_in >= 0 and thin >= 1")
        if not 0 < self.beta <= 1:
            raise ConfigError(f"beta must lie in (0, 1], got {self.beta}")
        for name in ("sigma", "prior_var", "h_data", "h_operator", "h_eval"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if self.M < 1 or self.N < 0:
            raise ConfigError("basis needs M >= 1 and N >= 0")
        if self.disc_override is None:
            g = self.resolved_gamma()
            if not 0 <= g <= 1:
                raise ConfigError(f"gamma must lie in [0, 1], got {g}")
            if not set(np.round(self.dsm_wavenumbers, 12)) <= set(np.round(self.all_wavenumbers, 12)):
                raise ConfigError("dsm wavenumbers must be available in the data")
        if self.proposal not in ("literal", "prior"):
            raise ConfigError(f"unknown proposal {self.proposal!r}")

    @property
    def all_wavenumbers(self):
        ks = np.concatenate([np.asarray(self.bayes_wavenumbers, float),
                             np.asarray(self.dsm_wavenumbers, float)])
        return np.unique(ks)


@dataclass
class RunReport:
    disc: Disc = None
    ae: float = None
    re: float = None
    f_norm: float = None
    acceptance_rate: float = None
    conditional_mean: list = None
    indicator_max: float = None
    wall_time: float = None
    backend: str = None
    manifest: list = field(default_factory=list)
    error: dict = None

    def to_json(self):
        d = asdict(self)
        if self.disc is not None:
            d["disc"] = {"center": list(self.disc.center), "radius": self.disc.radius}
        return d


def error_metrics(f_true, f_be, weights):
    """Discrete L2 errors ``(AE, RE)`` with quadrature ``weights`` on a common grid."""
    f_true, f_be, w = (np.asarray(a, dtype=np.float64) for a in (f_true, f_be, weights))
    if not f_true.shape == f_be.shape == w.shape:
        raise DomainError("error metrics need values on identical grids")
    ae = float(np.sqrt(np.sum(w * (f_true - f_be) ** 2)))
    norm = float(np.sqrt(np.sum(w * f_true**2)))
    if norm == 0:
        raise DomainError("relative error undefined: ||f|| = 0")
    return ae, ae / norm


def _extent(region):
    if isinstance(region, Disc):
        return np.hypot(*region.center) + region.radius
    if isinstance(region, Ellipse):
        return np.hypot(*region.center) + max(region.a, region.b)
    if isinstance(region, Square):
        return np.sqrt(2) * max(abs(region.lo), abs(region.hi))
    return 0.0


def evaluation_disc(source, disc):
    """Origin-centred disc covering both the source region and ``disc``."""
    extent = max(_extent(source.data_region), _extent(source.support), _extent(disc))
    return Disc((0.0, 0.0), extent)


def _sha256(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except StageError:
        raise
    except (ValueError, ArithmeticError, RuntimeError, OSError) as exc:
        raise StageError(name, exc) from exc


def simulate(cfg):
    """Perturbed far-field data for the union of the DSM and Bayes wavenumbers."""
    threads = cfg.threads or os.cpu_count() or 1
    src = cfg.resolved_source()
    clean = generate_dataset(src, cfg.resolved_aperture(), cfg.all_wavenumbers,
                             h=cfg.h_data, threads=threads)
    return perturb(clean, cfg.noise_level, cfg.noise_mode, rng=cfg.seed)


def run_dsm(cfg, data):
    threads = cfg.threads or os.cpu_count() or 1
    grid = dsm_mod.SamplingGrid(cfg.grid_lo, cfg.grid_hi, cfg.grid_count)
    field_ = dsm_mod.indicator_field(grid, data.select(cfg.dsm_wavenumbers), cfg.indicator_form,
                                     cfg.normalize_indicator, threads)
    disc = dsm_mod.estimate_disc(field_, cfg.resolved_gamma(), cfg.disc_mode)
    return field_, disc


def gamma_sweep(cfg, gammas):
    """Radius at each cutoff from a single DSM pass."""
    data = _stage("simulate", simulate, replace(cfg, bayes_wavenumbers=tuple(cfg.dsm_wavenumbers)))
    grid = dsm_mod.SamplingGrid(cfg.grid_lo, cfg.grid_hi, cfg.grid_count)
    field_ = _stage("dsm", dsm_mod.indicator_field, grid, data.select(cfg.dsm_wavenumbers),
                    cfg.indicator_form, cfg.normalize_indicator, cfg.threads or 1)
    return dsm_mod.gamma_sweep(field_, gammas, cfg.disc_mode)


def reconstruct(cfg, data, disc):
    """pCN posterior sampling for the expansion coefficients on ``disc``."""
    threads = cfg.threads or os.cpu_count() or 1
    basis = BasisIndex(cfg.M, cfg.N)
    bayes_data = data.select(cfg.bayes_wavenumbers)
    op = assemble_forward_operator(basis, disc, bayes_data.aperture, bayes_data.wavenumbers,
                                   mesh=operator_mesh(disc, cfg.h_operator), threads=threads)
    lik = LikelihoodSpec(bayes_data, op, cfg.sigma)
    chain = run_chain(lik, PriorSpec(cfg.prior_var), cfg.beta, cfg.steps, cfg.burn_in,
                      cfg.thin, cfg.seed, proposal=cfg.proposal)
    summary = summarize(chain, cfg.bins)
    return chain, summary, CoefficientVector(summary.conditional_mean, basis, disc)


def evaluate(cfg, source, coeffs):
    """AE/RE on a fine mesh of a disc covering the source and the estimated disc."""
    region = evaluation_disc(source, coeffs.disc)
    mesh = build_mesh(region, cfg.h_eval)
    f_true = source_values_on(source, mesh)
    f_be = basis_matrix(coeffs.basis, coeffs.disc, mesh.centroids) @ coeffs.values
    ae, re = error_metrics(f_true, f_be, mesh.areas)
    f_norm = float(np.sqrt(np.sum(mesh.areas * f_true**2)))
    return ae, re, f_norm, region


def save_field(source, coeffs, region, path, count=FIELD_GRID):
    axis = np.linspace(-region.radius, region.radius, count) + 0.0
    gx, gy = np.meshgrid(axis, axis, indexing="ij")
    pts = np.column_stack([gx.ravel(), gy.ravel()])
    f_true = np.asarray(evaluate_source(source, pts))
    f_be = basis_matrix(coeffs.basis, coeffs.disc, pts) @ coeffs.values
    np.savetxt(path, np.column_stack([pts, f_true, f_be]), fmt="%.17g", delimiter=", ",
               header="x, y, f_true, f_be", comments="")


def run_pipeline(cfg):
    """Simulate data, estimate the disc, sample the posterior, score and emit files.

    A failing stage raises :class:`StageError`; when ``cfg.output_dir`` is set
    the partial report (with the error) is still written first.
    """
    t0 = time.perf_counter()
    report = RunReport()
    report.backend = _backend.NAME
    out = Path(cfg.output_dir) if cfg.output_dir is not None else None
    files = []
    try:
        _stage("config", cfg.validate)
        source = _stage("config", cfg.resolved_source)
        if out is not None:
            _stage("io", _ensure_dir, out)
        data = _stage("simulate", simulate, cfg)
        if out is not None:
            files.append(_stage("io", _write, save_farfield, data, out / "farfield.txt"))
        if cfg.disc_override is not None:
            disc = cfg.disc_override
        else:
            field_, disc = _stage("dsm", run_dsm, cfg, data)
            report.indicator_max = field_.raw_max
            if out is not None:
                files.append(_stage("io", _write, dsm_mod.save_indicator, field_, out / "indicator.csv"))
                files.append(_stage("io", _write_disc, disc, cfg.resolved_gamma(), out / "disc.csv"))
        report.disc = disc
        chain, summary, coeffs = _stage("bayes", reconstruct, cfg, data, disc)
        report.acceptance_rate = summary.acceptance_rate
        report.conditional_mean = [float(v) for v in coeffs.values]
        report.ae, report.re, report.f_norm, region = _stage("evaluate", evaluate, cfg, source, coeffs)
        if out is not None:
            files.append(_stage("io", _write, save_chain, chain, out / "chain.txt"))
            files.append(_stage("io", _write_summary, summary, coeffs.basis, out / "summary.txt"))
            files.append(_stage("io", _write, save_field, source, coeffs, region,
                                out / "field.csv"))
    except StageError as exc:
        report.error = {"stage": exc.stage, "message": str(exc.cause)}
        raise
    finally:
        report.wall_time = time.perf_counter() - t0
        report.manifest = [{"file": p.name, "sha256": _sha256(p)} for p in files]
        if out is not None and out.is_dir():
            try:
                (out / "report.json").write_text(json.dumps(report.to_json(), indent=2) + "\n")
            except OSError:
                pass
    return report


def _ensure_dir(path):
    try:
        path.mkdir(parents=True, exist_ok=True)
        probe = path / ".write-test"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise OSError(f"cannot write to {path}: {exc}") from exc


def _write(fn, *args):
    path = args[-1]
    try:
        fn(*args)
    except OSError as exc:
        raise OSError(f"failed writing {path}: {exc}") from exc
    return path


def _write_disc(disc, gamma, path):
    return _write(dsm_mod.save_disc_summary, disc, gamma, path)


def _write_summary(summary, basis, path):
    return _write(lambda s, p: save_summary(s, p, basis), summary, path)


def config_from_mapping(values):
    """Build an :class:`ExperimentConfig` from flat string key-value pairs."""
    known = {f.name: f for f in fields(ExperimentConfig)}
    kwargs = {}
    for key, raw in values.items():
        key = key.strip().replace("-", "_")
        if key not in known:
            raise ConfigError(f"unknown config key {key!r}")
        kwargs[key] = _parse_value(key, str(raw).strip())
    return ExperimentConfig(**kwargs)


def _parse_value(key, raw):
    try:
        if key in ("example", "M", "N", "steps", "burn_in", "thin", "seed", "bins",
                   "threads", "grid_count"):
            return None if raw.lower() == "none" else int(raw)
        if key in ("gamma",):
            return None if raw.lower() == "none" else float(raw)
        if key in ("dsm_wavenumbers", "bayes_wavenumbers"):
            return tuple(parse_wavenumbers(raw))
        if key == "aperture":
            if raw.upper() in DEFAULT_GAMMA:
                return raw.upper()
            return tuple(float(v) for v in raw.split(","))
        if key == "disc_override":
            if raw.lower() in ("", "none"):
                return None
            cx, cy, r = (float(v) for v in raw.split(","))
            return Disc((cx, cy), r)
        if key == "normalize_indicator":
            return raw.lower() in ("1", "true", "yes")
        if key in ("disc_mode", "indicator_form", "proposal", "noise_mode", "output_dir"):
            return raw
        if key == "source":
            raise ConfigError("custom sources are set from Python, not a config file")
        return float(raw)
    except (ValueError, DomainError) as exc:
        raise ConfigError(f"bad value for {key}: {raw!r} ({exc})") from exc


def parse_wavenumbers(text):
    """``"1:1:20"`` (start:step:stop, inclusive) or a comma list."""
    text = text.strip()
    if ":" in text:
        parts = [float(p) for p in text.split(":")]
        if len(parts) == 2:
            return wavenumber_range(parts[0], parts[1])
        start, step, stop = parts
        return wavenumber_range(start, stop, step)
    return np.array([float(v) for v in text.split(",")])


def read_config_file(path):
    values = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, val = line.split("=", 1)
        values[key.strip()] = val.strip()
    return values
