"""
Prediction-error laws and reproducible sampling.

G = f - g (previous-day error) and H = f - h (same-day error) are modelled
as independent random variables. Normal models carry a density and feed the
quadrature path; empirical models are sampling-only.

Random numbers come from counter-based Philox generators keyed by
(seed, stream_id, block, component). Each normal variate consumes exactly
one uniform (inverse-CDF transform), so streams never drift out of alignment.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from lab.procurement.errors import InvalidArgumentError, UnsupportedPathError

NORMAL = "normal"
EMPIRICAL = "empirical"

# ndtri(0) = -inf; the smallest positive double keeps every variate finite
_U_FLOOR = np.finfo(float).tiny


def normal_pdf(x, sigma):
    """
    (1 / sqrt(2 pi sigma^2)) exp(-x^2 / (2 sigma^2))
    """
    if not (math.isfinite(sigma) and sigma > 0):
        raise InvalidArgumentError(f"sigma must be finite and > 0, got {sigma!r}")
    x = np.asarray(x, dtype=float)
    out = np.exp(-0.5 * (x / sigma) ** 2) / (math.sqrt(2.0 * math.pi) * sigma)
    return float(out) if out.ndim == 0 else out


# ==========================================
# 1. RANDOM STREAMS
# ==========================================

@dataclass(frozen=True)
class RandomStream:
    """
    Value-like handle on a counter-based random stream.

    The same (seed, stream_id, block, component) always yields the same
    sequence, whatever thread evaluates it.
    """
    seed: int
    stream_id: int = 0
    block: int = 0

    def __post_init__(self):
        if int(self.seed) < 0 or int(self.stream_id) < 0 or int(self.block) < 0:
            raise InvalidArgumentError("seed, stream_id and block must be non-negative integers")

    def split(self, block):
        return RandomStream(self.seed, self.stream_id, block)

    def generator(self, component=0):
        seq = np.random.SeedSequence(int(self.seed), spawn_key=(int(self.stream_id), int(self.block), int(component)))
        return np.random.Generator(np.random.Philox(seq))

    def uniforms(self, n, component=0):
        return self.generator(component).random(n)


# ==========================================
# 2. ERROR MODELS
# ==========================================

@dataclass(frozen=True)
class ErrorModel:
    kind: str
    mean: float = 0.0
    sigma: float = float("nan")
    samples: tuple = field(default=(), repr=False)

    def __post_init__(self):
        if self.kind == NORMAL:
            if not (math.isfinite(self.sigma) and self.sigma > 0):
                raise InvalidArgumentError(f"normal error model needs finite sigma > 0, got {self.sigma!r}")
            if not math.isfinite(self.mean):
                raise InvalidArgumentError(f"normal error model needs a finite mean, got {self.mean!r}")
        elif self.kind == EMPIRICAL:
            if len(self.samples) < 2:
                raise InvalidArgumentError("empirical error model needs at least 2 samples")
            if not all(math.isfinite(s) for s in self.samples):
                raise InvalidArgumentError("empirical samples must all be finite")
        else:
            raise InvalidArgumentError(f"unknown error model kind {self.kind!r}")

    @classmethod
    def normal(cls, sigma, mean=0.0):
        return cls(kind=NORMAL, mean=float(mean), sigma=float(sigma))

    @classmethod
    def from_variance(cls, variance, mean=0.0):
        if not (math.isfinite(variance) and variance > 0):
            raise InvalidArgumentError(f"variance must be finite and > 0, got {variance!r}")
        return cls.normal(math.sqrt(variance), mean)

    @classmethod
    def empirical(cls, samples):
        values = tuple(float(s) for s in samples)
        return cls(kind=EMPIRICAL, mean=float(np.mean(values)) if values else 0.0, samples=values)

    @property
    def has_density(self):
        return self.kind == NORMAL

    @property
    def variance(self):
        if self.kind == NORMAL:
            return self.sigma ** 2
        return float(np.var(self.samples))

    def _require_density(self):
        if not self.has_density:
            raise UnsupportedPathError("empirical error models are sampling-only; use Monte Carlo")

    def pdf(self, x):
        self._require_density()
        return normal_pdf(np.asarray(x, dtype=float) - self.mean, self.sigma)

    def cdf(self, x):
        self._require_density()
        return special.ndtr((np.asarray(x, dtype=float) - self.mean) / self.sigma)

    def sf(self, x):
        self._require_density()
        return special.ndtr((self.mean - np.asarray(x, dtype=float)) / self.sigma)

    def support(self, n_sigmas):
        """Interval carrying all but a negligible tail of the mass."""
        if self.kind == NORMAL:
            return self.mean - n_sigmas * self.sigma, self.mean + n_sigmas * self.sigma
        return min(self.samples), max(self.samples)


def sample(model, stream, size=None, component=0):
    """
    Draw from an error model.

    normal:    mean + sigma * Phi^-1(u)
    empirical: samples[floor(u * n)]
    One uniform per variate in both cases.
    """
    n = 1 if size is None else int(size)
    u = stream.uniforms(n, component)
    if model.kind == NORMAL:
        draws = model.mean + model.sigma * special.ndtri(np.maximum(u, _U_FLOOR))
    else:
        pool = np.asarray(model.samples, dtype=float)
        idx = np.minimum((u * len(pool)).astype(np.int64), len(pool) - 1)
        draws = pool[idx]
    return float(draws[0]) if size is None else draws


# ==========================================
# 3. DIFFERENCE LAW  D = G - H
# ==========================================

@dataclass(frozen=True)
class DifferenceModel:
    """
    Law of D = G - H for independent G and H.

    Two normals give N(mu_G - mu_H, sigma_G^2 + sigma_H^2); anything
    involving an empirical model is represented by its two parts and
    can only be sampled.
    """
    pg: ErrorModel
    ph: ErrorModel

    @property
    def is_normal(self):
        return self.pg.kind == NORMAL and self.ph.kind == NORMAL

    @property
    def mean(self):
        return self.pg.mean - self.ph.mean

    @property
    def variance(self):
        return self.pg.variance + self.ph.variance

    @property
    def sigma(self):
        return math.sqrt(self.variance)

    def as_normal(self):
        if not self.is_normal:
            raise UnsupportedPathError("difference law has no closed form for empirical inputs; use Monte Carlo")
        return ErrorModel.normal(self.sigma, self.mean)

    def pdf(self, x):
        return self.as_normal().pdf(x)

    def sample(self, stream, size=None):
        g = sample(self.pg, stream, size, component=0)
        h = sample(self.ph, stream, size, component=1)
        return g - h


def difference_model(pg, ph):
    return DifferenceModel(pg, ph)
