"""
Expected procurement cost E[C] and its Monte Carlo counterpart.

Quadrature path (normal error models):
    E[C1] = E[a] (E[g] + A)
    E[C2] = E[b] * Int_{A-B}^inf (x - A + B) P_{G-H}(x) dx
    E[C3] = E[c] * ( Int_A^inf P_G(y) Int_B^{y-A+B} (x - B) P_H(x) dx dy
                   + Int_B^inf P_H(x) Int_A^{x+A-B} (y - A) P_G(y) dy dx )

Monte Carlo path (any samplable model):
    sample G, H; rebuild g = f - G, h = f - H; evaluate the realized cost.
    Never uses the expectation formulas above.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from loguru import logger
from scipy import integrate, special

from lab.procurement import config
from lab.procurement.cost_model import PriceTriple, cost_arrays
from lab.procurement.distributions import ErrorModel, RandomStream, difference_model, sample
from lab.procurement.errors import InvalidArgumentError, UnsupportedPathError

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


# ==========================================
# 1. INPUTS / OUTPUTS
# ==========================================

@dataclass(frozen=True)
class ExpectationInputs:
    """
    Expected prices, expected previous-day prediction, hedge pair and error laws.

    Eg equals f under mean-zero errors. Decision contexts where f is unknown
    pass Eg = 0 and get an offset-free objective with the same argmin.
    """
    Ea: float
    Eb: float
    Ec: float
    Eg: float
    A: float
    B: float
    pg: ErrorModel
    ph: ErrorModel

    def __post_init__(self):
        for name in ("Ea", "Eb", "Ec", "Eg", "A", "B"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise InvalidArgumentError(f"{name} must be finite, got {value!r}")
        for name in ("Ea", "Eb", "Ec"):
            if getattr(self, name) < 0:
                raise InvalidArgumentError(f"expected price {name} must be >= 0")

    @property
    def prices(self):
        return PriceTriple(self.Ea, self.Eb, self.Ec)

    def at(self, A, B):
        return ExpectationInputs(self.Ea, self.Eb, self.Ec, self.Eg, float(A), float(B), self.pg, self.ph)


@dataclass(frozen=True)
class McEstimate:
    mean: float
    unbiased_variance: float
    std_error: float
    n: int
    seed: int

    def as_dict(self):
        return {
            "mean": self.mean,
            "unbiased_variance": self.unbiased_variance,
            "std_error": self.std_error,
            "n": self.n,
            "seed": self.seed,
        }


# ==========================================
# 2. QUADRATURE PATH
# ==========================================

def expected_c1(Ea, Eg, A):
    """
    E[C1] = E[a] (E[g] + A)
    """
    return Ea * (Eg + A)


def _positive_part_mean(mu, sigma, k):
    """
    E[(D - k)+] for D ~ N(mu, sigma^2):
        (mu - k) Phi((mu - k)/sigma) + sigma phi((mu - k)/sigma)
    """
    z = (mu - k) / sigma
    return (mu - k) * special.ndtr(z) + sigma * _INV_SQRT_2PI * np.exp(-0.5 * z * z)


def expected_c2(Eb, A, B, diff):
    """
    Closed form of E[C2] for a normal difference law.
    """
    if not diff.is_normal:
        raise UnsupportedPathError("expected_c2 needs normal error models; use monte_carlo")
    if Eb == 0:
        return 0.0
    return float(Eb * _positive_part_mean(diff.mean, diff.sigma, A - B))


def expected_c2_quadrature(Eb, A, B, diff, *, n_sigmas=config.TRUNCATION_SIGMAS, epsabs=config.QUAD_EPSABS):
    """
    E[C2] by direct adaptive quadrature; cross-check for the closed form.
    """
    law = diff.as_normal()
    if Eb == 0:
        return 0.0
    k = A - B
    upper = law.mean + n_sigmas * law.sigma
    lower = max(k, law.mean - n_sigmas * law.sigma)
    if lower >= upper:
        return 0.0

    def integrand(x):
        return (x - k) * law.pdf(x)

    value, _ = integrate.quad(integrand, lower, upper, epsabs=epsabs, epsrel=1e-10, limit=config.QUAD_LIMIT)
    return Eb * value


def _partial_first_moment(model, lo, hi):
    """
    Int_lo^hi (x - lo) p(x) dx for a normal density p; zero when hi <= lo.
    """
    hi = np.maximum(hi, lo)
    mu, s = model.mean, model.sigma
    return (mu - lo) * (model.cdf(hi) - model.cdf(lo)) + s * s * (model.pdf(lo) - model.pdf(hi))


def _c3_term(outer, outer_offset, inner, inner_offset, inner_mode, n_sigmas, epsabs, inner_epsabs):
    """
    Int_{outer_offset}^inf p_outer(y) Int_{inner_offset}^{y - outer_offset + inner_offset} (x - inner_offset) p_inner(x) dx dy
    """
    lo, hi = outer.support(n_sigmas)
    lo = max(lo, outer_offset)
    if lo >= hi:
        return 0.0

    if inner_mode == "closed":
        def inner_integral(y):
            return float(_partial_first_moment(inner, inner_offset, y - outer_offset + inner_offset))
    else:
        in_lo, in_hi = inner.support(n_sigmas)

        def inner_integral(y):
            a = max(inner_offset, in_lo)
            b = min(y - outer_offset + inner_offset, in_hi)
            if a >= b:
                return 0.0
            val, _ = integrate.quad(
                lambda x: (x - inner_offset) * inner.pdf(x), a, b,
                epsabs=inner_epsabs, epsrel=1e-10, limit=config.QUAD_LIMIT,
            )
            return val

    def integrand(y):
        return float(outer.pdf(y)) * inner_integral(y)

    value, _ = integrate.quad(integrand, lo, hi, epsabs=epsabs, epsrel=1e-10, limit=config.QUAD_LIMIT)
    return value


def expected_c3(Ec, A, B, pg, ph, *, inner="closed", n_sigmas=config.TRUNCATION_SIGMAS,
                epsabs=config.QUAD_EPSABS, inner_epsabs=config.QUAD_INNER_EPSABS):
    """
    E[C3] as the sum of two double integrals over the error densities.

    inner="closed" evaluates the inner integral analytically,
    inner="quad" integrates it adaptively as well.
    """
    if not (pg.has_density and ph.has_density):
        raise UnsupportedPathError("expected_c3 needs normal error models; use monte_carlo")
    if inner not in ("closed", "quad"):
        raise InvalidArgumentError(f"inner must be 'closed' or 'quad', got {inner!r}")
    if Ec == 0:
        return 0.0

    first = _c3_term(pg, A, ph, B, inner, n_sigmas, epsabs, inner_epsabs)
    second = _c3_term(ph, B, pg, A, inner, n_sigmas, epsabs, inner_epsabs)
    return Ec * (first + second)


def expected_components(inputs, *, inner="closed"):
    """(E[C1], E[C2], E[C3]) for one hedge pair."""
    diff = difference_model(inputs.pg, inputs.ph)
    return (
        expected_c1(inputs.Ea, inputs.Eg, inputs.A),
        expected_c2(inputs.Eb, inputs.A, inputs.B, diff),
        expected_c3(inputs.Ec, inputs.A, inputs.B, inputs.pg, inputs.ph, inner=inner),
    )


def expected_total(inputs, *, inner="closed"):
    c1, c2, c3 = expected_components(inputs, inner=inner)
    return c1 + c2 + c3


def expected_total_surface(Ea, Eb, Ec, Eg, A, B, pg, ph, *, n_sigmas=config.TRUNCATION_SIGMAS,
                           epsabs=config.QUAD_EPSABS):
    """
    E[C] over arrays of (A, B) in one vectorized pass.

    Uses E[(min(G - A, H - B))+] = Int_0^inf P(G > A + x) P(H > B + x) dx
    for the penalty term, integrated with quad_vec across all cells at once.
    """
    if not (pg.has_density and ph.has_density):
        raise UnsupportedPathError("expectation surfaces need normal error models")
    A, B = np.broadcast_arrays(np.asarray(A, dtype=float), np.asarray(B, dtype=float))
    diff = difference_model(pg, ph)

    c1 = Ea * (Eg + A)
    c2 = Eb * _positive_part_mean(diff.mean, diff.sigma, A - B)

    reach = np.minimum(pg.support(n_sigmas)[1] - A, ph.support(n_sigmas)[1] - B)
    upper = float(np.max(reach)) if reach.size else 0.0
    if Ec == 0 or upper <= 0:
        c3 = np.zeros_like(A)
    else:
        def survival(x):
            return pg.sf(A + x) * ph.sf(B + x)

        tail, _ = integrate.quad_vec(survival, 0.0, upper, epsabs=epsabs, epsrel=1e-10, norm="max")
        c3 = Ec * tail
    return c1 + c2 + c3


# ==========================================
# 3. MONTE CARLO PATH
# ==========================================

def _block_sizes(n, block):
    full, rest = divmod(n, block)
    return [block] * full + ([rest] if rest else [])


def _block_costs(inputs, f, prices, stream, size):
    G = sample(inputs.pg, stream, size, component=0)
    H = sample(inputs.ph, stream, size, component=1)
    c1, c2, c3 = cost_arrays(f, f - G, f - H, inputs.A, inputs.B, prices.a, prices.b, prices.c)
    return c1 + c2 + c3


def _block_stats(costs):
    mean = float(np.mean(costs))
    return len(costs), mean, float(np.sum((costs - mean) ** 2))


def _merge(left, right):
    count_a, mean_a, m_a = left
    count_b, mean_b, m_b = right
    count = count_a + count_b
    ratio = count_b / count
    delta = mean_b - mean_a
    return count, mean_a + delta * ratio, m_a + m_b + delta * delta * count_a * ratio


def _pairwise(stats):
    if len(stats) == 1:
        return stats[0]
    pivot = len(stats) // 2
    merged = _merge(_pairwise(stats[:pivot]), _pairwise(stats[pivot:]))
    logger.debug(f"merged {len(stats)} blocks -> n={merged[0]}")
    return merged


def _check_n(n):
    if int(n) != n or n < 2:
        raise InvalidArgumentError(f"n must be an integer >= 2, got {n!r}")
    return int(n)


def simulate_costs(inputs, n, seed=config.DEFAULT_SEED, stream_id=0, f=None, prices=None, *,
                   block=config.MC_BLOCK, threads=1):
    """
    Realized cost samples, in the exact order monte_carlo aggregates them.

    f defaults to inputs.Eg; prices default to the expected prices.
    """
    n = int(n)
    if n < 1:
        raise InvalidArgumentError(f"n must be >= 1, got {n!r}")
    f = inputs.Eg if f is None else f
    prices = inputs.prices if prices is None else prices
    root = RandomStream(seed, stream_id)
    sizes = _block_sizes(n, block)

    def run(i):
        return _block_costs(inputs, f, prices, root.split(i), sizes[i])

    with ThreadPoolExecutor(max_workers=max(1, int(threads))) as pool:
        parts = list(pool.map(run, range(len(sizes))))
    return np.concatenate(parts)


def monte_carlo(inputs, n=config.DEFAULT_MC_N, seed=config.DEFAULT_SEED, *, stream_id=0, f=None,
                prices=None, threads=1, block=config.MC_BLOCK):
    """
    Mean and unbiased variance of n realized costs.

    Draws are cut into fixed blocks, each keyed by its own stream; block
    statistics merge pairwise in block order, so the estimate does not
    depend on the number of threads.
    """
    n = _check_n(n)
    f = inputs.Eg if f is None else f
    prices = inputs.prices if prices is None else prices
    root = RandomStream(seed, stream_id)
    sizes = _block_sizes(n, block)

    def run(i):
        return _block_stats(_block_costs(inputs, f, prices, root.split(i), sizes[i]))

    with ThreadPoolExecutor(max_workers=max(1, int(threads))) as pool:
        stats = list(pool.map(run, range(len(sizes))))

    count, mean, m2 = _pairwise(stats)
    variance = m2 / (count - 1)
    return McEstimate(
        mean=mean,
        unbiased_variance=variance,
        std_error=math.sqrt(variance / count),
        n=count,
        seed=int(seed),
    )


def histogram(samples, bin_width, *, n=None, seed=config.DEFAULT_SEED, threads=1):
    """
    Contiguous left-closed bins [k w, (k+1) w) covering the samples.

    samples may be an ExpectationInputs, in which case n costs are simulated first.
    Returns a list of (bin_low, count).
    """
    if not (math.isfinite(bin_width) and bin_width > 0):
        raise InvalidArgumentError(f"bin_width must be > 0, got {bin_width!r}")
    if isinstance(samples, ExpectationInputs):
        if n is None:
            raise InvalidArgumentError("n is required when histogramming simulated costs")
        samples = simulate_costs(samples, n, seed, threads=threads)
    values = np.asarray(samples, dtype=float)
    if values.size == 0:
        raise InvalidArgumentError("histogram needs at least one sample")

    idx = np.floor(values / bin_width).astype(np.int64)
    first = int(idx.min())
    counts = np.bincount(idx - first)
    return [((first + k) * bin_width, int(count)) for k, count in enumerate(counts)]
