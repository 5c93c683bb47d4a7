"""
Realized procurement cost for one delivery period.

Procurement rule:
    day-ahead market buys     e1 = g + A          at unit price a
    intra-day market tops up  to h + B (if above e1) at unit price b
    any remaining shortfall   f - max(g+A, h+B)   is supplied at penalty price c
    any excess                max(g+A, h+B) - f   is absorbed without payment

The formulas are evaluated verbatim; negative quantities are not clamped.
"""

import math
from dataclasses import dataclass

import numpy as np
from loguru import logger

from lab.procurement.errors import InvalidArgumentError


def _require_finite(**values):
    for name, value in values.items():
        if not math.isfinite(value):
            raise InvalidArgumentError(f"{name} must be finite, got {value!r}")


# ==========================================
# 1. DOMAIN TYPES
# ==========================================

@dataclass(frozen=True)
class ProcurementParams:
    """
    Predictions and hedge offsets for one period.

    g: previous-day demand prediction
    h: same-day demand prediction
    A: day-ahead hedge offset (buy g + A day-ahead)
    B: intra-day hedge offset (top up to h + B intra-day)
    """
    g: float
    h: float
    A: float = 0.0
    B: float = 0.0

    def __post_init__(self):
        _require_finite(g=self.g, h=self.h, A=self.A, B=self.B)

    @property
    def day_ahead_quantity(self):
        return self.g + self.A

    @property
    def target_quantity(self):
        return self.h + self.B


@dataclass(frozen=True)
class PriceTriple:
    """Day-ahead, intra-day and penalty unit prices (actual or expected)."""
    a: float
    b: float
    c: float

    def __post_init__(self):
        _require_finite(a=self.a, b=self.b, c=self.c)
        for name in ("a", "b", "c"):
            if getattr(self, name) < 0:
                raise InvalidArgumentError(f"price {name} must be >= 0, got {getattr(self, name)!r}")

    @property
    def ordered(self):
        """True when a < b < c, the ordering a working balancing market produces."""
        return self.a < self.b < self.c

    def scaled(self, factor):
        return PriceTriple(self.a * factor, self.b * factor, self.c * factor)


@dataclass(frozen=True)
class CostBreakdown:
    c1: float
    c2: float
    c3: float
    total: float
    e1: float
    e2: float
    supplemental: float
    surplus: float

    def as_dict(self):
        return {
            "c1": self.c1,
            "c2": self.c2,
            "c3": self.c3,
            "total": self.total,
            "e1": self.e1,
            "e2": self.e2,
            "supplemental": self.supplemental,
            "surplus": self.surplus,
        }


# ==========================================
# 2. COST COMPONENTS
# ==========================================

def day_ahead_cost(p, a):
    """
    C1 = (g + A) a
    """
    _require_finite(a=a)
    return (p.g + p.A) * a


def intra_day_cost(p, b):
    """
    C2 = delta(g + A <= h + B) (h + B - g - A) b

    The boundary g + A = h + B takes the first branch and buys nothing.
    """
    _require_finite(b=b)
    if p.day_ahead_quantity <= p.target_quantity:
        return (p.h + p.B - p.g - p.A) * b
    return 0.0


def penalty_cost(f, p, c):
    """
    C3 = delta(g + A <= h + B <= f) (f - h - B) c
       + delta(h + B < g + A <= f) (f - g - A) c
    """
    _require_finite(f=f, c=c)
    e1 = p.day_ahead_quantity
    target = p.target_quantity
    if e1 <= target <= f:
        return (f - p.h - p.B) * c
    if target < e1 <= f:
        return (f - p.g - p.A) * c
    return 0.0


def total_cost(f, p, prices):
    """
    C = C1 + C2 + C3, with the physical quantities that produce it.
    """
    _require_finite(f=f)
    c1 = day_ahead_cost(p, prices.a)
    c2 = intra_day_cost(p, prices.b)
    c3 = penalty_cost(f, p, prices.c)

    e1 = p.day_ahead_quantity
    target = p.target_quantity
    if e1 < 0:
        logger.warning(f"day-ahead quantity g + A = {e1:.6g} is negative; evaluating verbatim")
    delivered = max(e1, target)
    return CostBreakdown(
        c1=c1,
        c2=c2,
        c3=c3,
        total=c1 + c2 + c3,
        e1=e1,
        e2=max(0.0, target - e1),
        supplemental=max(0.0, f - delivered),
        surplus=max(0.0, delivered - f),
    )


def rewrite_in_errors(f, p):
    """
    Prediction errors G = f - g and H = f - h.
    """
    _require_finite(f=f)
    return f - p.g, f - p.h


# ==========================================
# 3. ERROR FORM (G, H)
# ==========================================

def intra_day_cost_from_errors(G, H, A, B, b):
    """
    C2 = delta(A - B <= G - H) (G - H - A + B) b
    """
    _require_finite(G=G, H=H, A=A, B=B, b=b)
    if A - B <= G - H:
        return (G - H - A + B) * b
    return 0.0


def penalty_cost_from_errors(G, H, A, B, c):
    """
    C3 = delta(B <= H <= G - A + B) (H - B) c
       + delta(A <= G < H + A - B) (G - A) c
    """
    _require_finite(G=G, H=H, A=A, B=B, c=c)
    if B <= H <= G - A + B:
        return (H - B) * c
    if A <= G < H + A - B:
        return (G - A) * c
    return 0.0


# ==========================================
# 4. VECTORIZED
# ==========================================

def cost_arrays(f, g, h, A, B, a, b, c):
    """
    Eqs. for C1, C2, C3 broadcast over numpy arrays.

    Returns (c1, c2, c3) as float arrays of the broadcast shape.
    """
    f, g, h, A, B, a, b, c = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (f, g, h, A, B, a, b, c)))
    e1 = g + A
    target = h + B

    c1 = e1 * a
    c2 = np.where(e1 <= target, (target - e1) * b, 0.0)
    c3 = np.where(
        (e1 <= target) & (target <= f),
        (f - target) * c,
        np.where((target < e1) & (e1 <= f), (f - e1) * c, 0.0),
    )
    return c1, c2, c3
