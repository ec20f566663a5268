"""Gaussian prior and likelihood, pCN Metropolis-Hastings, and posterior summaries.

Random numbers come from ``numpy.random.Generator(PCG64(seed))``.  A chain
consumes them block by block: for each block of up to ``BLOCK`` steps it
first draws a ``(steps, d)`` array of standard normals (numpy's ziggurat
transform), then ``steps`` uniforms on ``[0, 1)``.  The layout is part of the
reproducibility contract and does not depend on the kernel backend.
"""

from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from . import _backend
from .errors import ContractError, DomainError

BLOCK = 8192

PRIOR_SCALED = "prior"
LITERAL = "literal"


@dataclass(frozen=True)
class PriorSpec:
    """Centred Gaussian prior with the same variance for every coefficient."""

    variance: float = 0.01

    def __post_init__(self):
        if not self.variance > 0:
            raise DomainError(f"prior variance must be positive, got {self.variance}")

    @property
    def std(self):
        return float(np.sqrt(self.variance))


@dataclass(frozen=True)
class LikelihoodSpec:
    """Additive Gaussian noise model ``U = F A + eta``, ``eta ~ N(0, sigma^2 I)``.

    ``data`` is the wavenumber-major data vector and ``operator`` a complex
    matrix (or anything with a ``matrix`` attribute) with matching rows.
    """

    data: np.ndarray
    operator: object
    sigma: float = 0.04

    def __post_init__(self):
        if not self.sigma > 0:
            raise DomainError(f"sigma must be positive, got {self.sigma}")
        u = np.asarray(getattr(self.data, "vector", lambda: self.data)(), dtype=np.complex128)
        mat = np.asarray(getattr(self.operator, "matrix", self.operator), dtype=np.complex128)
        if mat.ndim != 2 or u.shape != (mat.shape[0],):
            raise ContractError(f"data length {u.shape} does not match operator rows {mat.shape}")
        object.__setattr__(self, "data", u)
        object.__setattr__(self, "operator", mat)

    @property
    def dim(self):
        return self.operator.shape[1]

    @cached_property
    def gram(self):
        """``Re(F^H F)``; for real ``A``, ``||U - F A||^2 = |U|^2 - 2 rhs.A + A.gram.A``."""
        f = self.operator
        return np.ascontiguousarray((f.conj().T @ f).real)

    @cached_property
    def rhs(self):
        return np.ascontiguousarray((self.operator.conj().T @ self.data).real)

    @cached_property
    def data_sq(self):
        return float(np.vdot(self.data, self.data).real)


def misfit(coeffs, likelihood):
    """``G(A; U) = ||U - F A||^2 / (2 sigma^2)``."""
    a = np.asarray(getattr(coeffs, "values", coeffs), dtype=np.float64)
    if a.shape != (likelihood.dim,):
        raise ContractError(f"coefficient length {a.shape} != operator columns {likelihood.dim}")
    r = likelihood.data - likelihood.operator @ a
    return float(np.vdot(r, r).real / (2.0 * likelihood.sigma**2))


def _check_beta(beta):
    if not 0 < beta <= 1:
        raise DomainError(f"beta must lie in (0, 1], got {beta}")


def _proposal_scale(prior, dim, proposal):
    if proposal == PRIOR_SCALED:
        return np.full(dim, prior.std)
    if proposal == LITERAL:
        return np.ones(dim)
    raise DomainError(f"unknown proposal {proposal!r}")


def pcn_propose(a, beta, rng, prior=PriorSpec(), proposal=LITERAL):
    """``sqrt(1 - beta^2) a + beta W``.

    ``W ~ N(0, I)`` for ``proposal="literal"``; ``W`` is a prior draw for
    ``proposal="prior"``, which makes the move reversible for the prior.
    """
    _check_beta(beta)
    a = np.asarray(a, dtype=np.float64)
    w = _proposal_scale(prior, a.size, proposal) * rng.standard_normal(a.size)
    return np.sqrt(1.0 - beta * beta) * a + beta * w


def pcn_accept(g_old, g_new, rng):
    """Metropolis step: accept with probability ``min(1, exp(g_old - g_new))``."""
    if np.isnan(g_old) or np.isnan(g_new):
        raise ContractError("misfit is NaN")
    u = rng.random()
    return bool(g_new <= g_old or u <= np.exp(g_old - g_new))


@dataclass
class MarkovChain:
    samples: np.ndarray
    accepted: int
    total_steps: int
    beta: float
    seed: int
    burn_in: int
    thin: int
    proposal: str = LITERAL
    final_state: np.ndarray = field(default=None, repr=False)
    final_misfit: float = None
    backend: str = _backend.NAME

    @property
    def acceptance_rate(self):
        return self.accepted / self.total_steps


def run_chain(likelihood, prior=PriorSpec(), beta=0.001, total_steps=120_000, burn_in=20_000,
              thin=1, seed=0, initial=None, proposal=LITERAL, dim=None):
    """pCN Metropolis-Hastings from ``initial`` (default: the prior mean, zero).

    With the default ``literal`` proposal the innovation is standard normal,
    so the chain targets ``exp(-G) N(0, I)``; ``proposal="prior"`` scales it
    by the prior standard deviation and targets ``exp(-G) N(0, prior)``.
    At ``beta = 1e-3`` the prior-scaled move is too small to leave the
    origin within a 20k-step burn-in on the built-in problems.
    ``likelihood=None`` disables the data term (``G = 0``); ``dim`` then
    sets the number of coefficients.  Samples after ``burn_in`` are kept
    every ``thin`` steps.
    """
    _check_beta(beta)
    if not total_steps > burn_in >= 0:
        raise DomainError(f"need total_steps > burn_in >= 0, got {total_steps}, {burn_in}")
    if thin < 1:
        raise DomainError(f"thin must be >= 1, got {thin}")
    if likelihood is None:
        if dim is None:
            raise ContractError("dim is required when the likelihood is disabled")
        gram, rhs, data_sq, scale2 = np.zeros((dim, dim)), np.zeros(dim), 0.0, 0.0
    else:
        dim = likelihood.dim
        gram, rhs, data_sq = likelihood.gram, likelihood.rhs, likelihood.data_sq
        scale2 = 1.0 / (2.0 * likelihood.sigma**2)
    state = np.zeros(dim) if initial is None else np.array(initial, dtype=np.float64)
    if state.shape != (dim,):
        raise ContractError(f"initial state has shape {state.shape}, expected ({dim},)")
    g = scale2 * (data_sq - 2.0 * rhs @ state + state @ gram @ state)
    scale = _proposal_scale(prior, dim, proposal)
    rng = np.random.Generator(np.random.PCG64(seed))
    out = np.empty(((total_steps - burn_in) // thin, dim))
    accepted = n_out = 0
    for step0 in range(0, total_steps, BLOCK):
        steps = min(BLOCK, total_steps - step0)
        normals = rng.standard_normal((steps, dim))
        uniforms = rng.random(steps)
        acc, g, n_out = _backend.pcn_segment(gram, rhs, data_sq, scale2, state, g, beta, scale,
                                             normals, uniforms, step0, burn_in, thin, out, n_out)
        accepted += acc
    return MarkovChain(out[:n_out], accepted, total_steps, beta, seed, burn_in, thin, proposal,
                       state, float(g), _backend.NAME)


@dataclass(frozen=True)
class PosteriorSummary:
    conditional_mean: np.ndarray
    histograms: list
    acceptance_rate: float


def summarize(chain, bins=50):
    """Conditional mean, per-coefficient histograms over ``[min, max]``, acceptance rate."""
    s = chain.samples
    if s.size == 0:
        raise ContractError("chain has no retained samples")
    hists = []
    for c in range(s.shape[1]):
        lo, hi = s[:, c].min(), s[:, c].max()
        counts, edges = np.histogram(s[:, c], bins=bins, range=(lo, hi) if hi > lo else None)
        hists.append((edges, counts))
    return PosteriorSummary(s.mean(axis=0), hists, chain.acceptance_rate)


def save_chain(chain, path):
    with Path(path).open("w") as fh:
        fh.write(f"# chain v1 seed={chain.seed} beta={float(chain.beta)!r} burn_in={chain.burn_in} "
                 f"thin={chain.thin} steps={chain.total_steps} accepted={chain.accepted} "
                 f"proposal={chain.proposal} dim={chain.samples.shape[1]}\n")
        np.savetxt(fh, chain.samples, fmt="%.17g")


def load_chain(path):
    with Path(path).open() as fh:
        header = fh.readline().split()
        if header[:3] != ["#", "chain", "v1"]:
            raise ValueError(f"{path}: not a chain v1 file")
        meta = dict(item.split("=", 1) for item in header[3:])
        samples = np.loadtxt(fh, ndmin=2).reshape(-1, int(meta["dim"]))
    return MarkovChain(samples, int(meta["accepted"]), int(meta["steps"]), float(meta["beta"]),
                       int(meta["seed"]), int(meta["burn_in"]), int(meta["thin"]), meta["proposal"])


def save_summary(summary, path, basis=None):
    terms = basis.terms if basis is not None else [None] * len(summary.conditional_mean)
    with Path(path).open("w") as fh:
        fh.write(f"acceptance_rate = {float(summary.acceptance_rate)!r}\n")
        for t, v in zip(terms, summary.conditional_mean):
            key = "cm" if t is None else f"cm[{t[0]},{t[1]},{t[2]}]"
            fh.write(f"{key} = {float(v)!r}\n")
