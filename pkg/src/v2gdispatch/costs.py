"""Net-cost models for EVs and the aggregator, and the evaluate-only cost oracle.

An EV's net cost of discharging at rate ``c`` (kW) is

    f(c) = alpha*c^2 + beta*c + gamma + other_ops - price*c

i.e. quadratic battery degradation plus a lumped operational cost, minus the
revenue from selling the power. The aggregator's net cost over per-EV rates
``c_1..c_n`` is

    Agg(c) = gen_a*D^2 + gen_b*D + gen_c - omega*log(R + 1)

with ``D = sum(eta_i * c_i)`` the AC power actually delivered (generation-cost
proxy) and ``R = sum(c_i)`` the raw DC power (utility term). Note the utility
term sums raw rates while the generation term sums efficiency-scaled rates.

Both models support scalar rates or numpy arrays of rates elementwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np


@dataclass(frozen=True)
class EvCostParams:
    """Coefficients of one EV's net discharge cost (currency units)."""

    alpha_deg: float  # currency/kW^2, strictly positive (convex degradation)
    beta_deg: float   # currency/kW
    gamma_deg: float  # currency
    other_ops: float  # currency, lumped non-degradation operating cost
    price: float      # currency/kW, fixed for the whole pricing period

    def __post_init__(self) -> None:
        if not self.alpha_deg > 0.0:
            raise ValueError(f"alpha_deg must be > 0, got {self.alpha_deg}")
        if self.other_ops < 0.0:
            raise ValueError(f"other_ops must be >= 0, got {self.other_ops}")
        if self.price < 0.0:
            raise ValueError(f"price must be >= 0, got {self.price}")


@dataclass(frozen=True)
class AggCostParams:
    """Aggregator net-cost coefficients plus per-EV conversion efficiencies."""

    gen_a: float  # currency/kW^2, strictly positive
    gen_b: float  # currency/kW
    gen_c: float  # currency
    omega: float  # currency, weight of the log-utility term
    eta: tuple[float, ...]  # DC-to-AC efficiency per EV, each in (0, 1]

    def __post_init__(self) -> None:
        if not self.gen_a > 0.0:
            raise ValueError(f"gen_a must be > 0, got {self.gen_a}")
        if self.omega < 0.0:
            raise ValueError(f"omega must be >= 0, got {self.omega}")
        for i, e in enumerate(self.eta):
            if not 0.0 < e <= 1.0:
                raise ValueError(f"eta[{i}] must be in (0, 1], got {e}")

    @property
    def eta_sum(self) -> float:
        return sum(self.eta)

    def restrict(self, ids: Sequence[int]) -> "AggCostParams":
        """Same coefficients, efficiency list restricted to the given EV ids."""
        return replace(self, eta=tuple(self.eta[i] for i in ids))


def _any_negative(rate) -> bool:
    if isinstance(rate, np.ndarray):
        return rate.size > 0 and float(rate.min()) < 0.0
    return rate < 0.0


def ev_net_cost(rate, params: EvCostParams):
    """Net cost of one EV discharging at ``rate`` kW (scalar or array)."""
    if _any_negative(rate):
        raise ValueError("discharge rate must be >= 0")
    degradation = params.alpha_deg * rate * rate + params.beta_deg * rate + params.gamma_deg
    revenue = params.price * rate
    return degradation + params.other_ops - revenue


def agg_net_cost(rates, params: AggCostParams):
    """Aggregator net cost for one per-EV rate vector."""
    rates = np.asarray(rates, dtype=float)
    if rates.ndim != 1 or rates.shape[0] != len(params.eta):
        raise ValueError(
            f"expected {len(params.eta)} rates, got shape {rates.shape}"
        )
    if np.any(rates < 0.0):
        raise ValueError("discharge rates must be >= 0")
    delivered = float(np.dot(params.eta, rates))
    raw = float(np.sum(rates))
    generation = params.gen_a * delivered * delivered + params.gen_b * delivered + params.gen_c
    utility = params.omega * math.log(raw + 1.0)
    return generation - utility


def agg_consensus_cost(rate, params: AggCostParams):
    """Aggregator net cost when every EV discharges at the same ``rate``.

    Equivalent to ``agg_net_cost([rate] * n, params)`` up to float summation
    order; vectorized over arrays of candidate rates.
    """
    if _any_negative(rate):
        raise ValueError("discharge rate must be >= 0")
    n = len(params.eta)
    delivered = params.eta_sum * rate
    raw = n * rate
    generation = params.gen_a * delivered * delivered + params.gen_b * delivered + params.gen_c
    return generation - params.omega * np.log(raw + 1.0)


@dataclass(frozen=True)
class CostSet:
    """One scenario instance's cost functions: per-EV params plus aggregator."""

    ev: tuple[EvCostParams, ...]
    agg: AggCostParams

    def __post_init__(self) -> None:
        if len(self.ev) != len(self.agg.eta):
            raise ValueError(
                f"{len(self.ev)} EV cost params but {len(self.agg.eta)} efficiencies"
            )

    def restrict(self, ids: Sequence[int]) -> "CostSet":
        return CostSet(
            ev=tuple(self.ev[i] for i in ids),
            agg=self.agg.restrict(ids),
        )


def consensus_objective(rate, ev_params: Sequence[EvCostParams], agg_params: AggCostParams):
    """Total net cost when all EVs share one common rate (scalar or array)."""
    total = agg_consensus_cost(rate, agg_params)
    for p in ev_params:
        total = total + ev_net_cost(rate, p)
    return total


def grid_search_rate(
    ev_params: Sequence[EvCostParams],
    agg_params: AggCostParams,
    lower: float,
    upper: float,
    step: float = 1e-4,
) -> tuple[float, float]:
    """Brute-force minimizer of the consensus objective on a uniform grid.

    Ground truth for every convergence check; ties resolve to the lowest rate.
    Returns (best_rate, best_value).
    """
    if not lower <= upper:
        raise ValueError(f"need lower <= upper, got [{lower}, {upper}]")
    n_points = int(round((upper - lower) / step)) + 1
    grid = np.linspace(lower, upper, n_points)
    values = consensus_objective(grid, ev_params, agg_params)
    i = int(np.argmin(values))
    return float(grid[i]), float(values[i])


class CostOracle:
    """Evaluate-only wrapper around a cost function.

    Hides the coefficients (value queries only, no derivative or parameter
    readout) and counts every evaluation, mirroring a remotely deployed cost
    model billed per call. The counter is a plain int: use one oracle per
    worker rather than sharing across threads.
    """

    def __init__(self, fn: Callable):
        self._fn = fn
        self._calls = 0

    @property
    def call_count(self) -> int:
        return self._calls

    def evaluate(self, x) -> float:
        self._calls += 1
        return float(self._fn(x))

    def evaluate_many(self, xs: np.ndarray) -> np.ndarray:
        """Evaluate a batch of inputs; each element counts as one call."""
        xs = np.asarray(xs, dtype=float)
        out = np.asarray(self._fn(xs), dtype=float)
        self._calls += xs.shape[0]
        return out

    @classmethod
    def for_ev(cls, params: EvCostParams) -> "CostOracle":
        return cls(lambda rate: ev_net_cost(rate, params))

    @classmethod
    def for_aggregator(cls, params: AggCostParams) -> "CostOracle":
        return cls(lambda rates: agg_net_cost(rates, params))

    @classmethod
    def for_aggregator_consensus(cls, params: AggCostParams) -> "CostOracle":
        """Oracle over one common rate applied to every EV in ``params.eta``."""
        return cls(lambda rate: agg_consensus_cost(rate, params))


def oracle_evaluate(oracle: CostOracle, x) -> float:
    """Evaluate through the oracle, incrementing its call counter by one."""
    return oracle.evaluate(x)


def sample_ev_cost_params(
    n: int,
    rng,
    price: float,
    alpha_range: tuple[float, float] = (0.001, 0.002),
    beta_range: tuple[float, float] = (0.001, 0.003),
    gamma_range: tuple[float, float] = (0.005, 0.015),
    other_range: tuple[float, float] = (0.005, 0.02),
) -> tuple[EvCostParams, ...]:
    """Draw per-EV cost coefficients uniformly from the configured ranges."""
    rng = np.random.default_rng(rng)
    out = []
    for _ in range(n):
        out.append(
            EvCostParams(
                alpha_deg=float(rng.uniform(*alpha_range)),
                beta_deg=float(rng.uniform(*beta_range)),
                gamma_deg=float(rng.uniform(*gamma_range)),
                other_ops=float(rng.uniform(*other_range)),
                price=price,
            )
        )
    return tuple(out)
