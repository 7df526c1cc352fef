"""Deliberation loop, cost accounting, and the flag-based learning demo.

The quantum agent prepares the stationary state, amplifies the flagged
actions with k diffusion steps, and samples; the classical agent samples the
stationary distribution directly.  Cost counts calls to the preparation
unitary: 2k+1 per quantum attempt, 1 per classical attempt.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .circuits import StationaryDistribution, diffusion, prepare_alpha
from .qsim import apply, probabilities

ATTEMPT_CAP = 10**6


def optimal_k(epsilon: float) -> int:
    """Optimal diffusion count round(pi / (4 sqrt(eps)) - 1/2).

    Rounding is half-away-from-zero; the result is never negative.
    """
    if not 0.0 < epsilon <= 1.0:
        raise ValueError(f"epsilon {epsilon} outside (0, 1]")
    x = math.pi / (4.0 * math.sqrt(epsilon)) - 0.5
    return max(0, int(math.floor(x + 0.5)))


def grover_success(epsilon: float, k: int) -> float:
    """Closed-form flagged probability sin^2((2k+1) asin(sqrt(eps))).

    Independent oracle for the circuit simulation: amplitude amplification
    rotates the state by 2 asin(sqrt(eps)) per diffusion step.
    """
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon {epsilon} outside [0, 1]")
    if k < 0:
        raise ValueError("k must be nonnegative")
    return math.sin((2 * k + 1) * math.asin(math.sqrt(epsilon))) ** 2


@dataclass(frozen=True)
class DiffusionPlan:
    """Flagged weight together with its diffusion count."""

    epsilon: float
    k: int

    @classmethod
    def for_epsilon(cls, epsilon: float) -> "DiffusionPlan":
        return cls(epsilon, optimal_k(epsilon))

    @property
    def calls_per_attempt(self) -> int:
        return 2 * self.k + 1


def run_ideal(epsilon: float, ratio: float = 1.0, k: int | None = None) -> np.ndarray:
    """Exact output distribution after preparation and k diffusion steps.

    ``k`` defaults to ``optimal_k(epsilon)``.  The flagged total matches
    ``grover_success`` and the flagged ratio b00/b01 equals ``ratio``.
    """
    dist = StationaryDistribution.from_epsilon_ratio(epsilon, ratio)
    return run_ideal_distribution(dist, k)


def run_ideal_distribution(dist: StationaryDistribution, k: int | None = None) -> np.ndarray:
    if k is None:
        k = optimal_k(dist.epsilon)
    angles = dist.angles()
    state = prepare_alpha(angles)
    step = diffusion(angles)
    for _ in range(k):
        state = apply(state, step)
    return probabilities(state)


@dataclass(frozen=True)
class DeliberationRecord:
    """Outcome of one deliberation: sampled action and accumulated cost."""

    action: int
    attempts: int
    up_calls: int
    backend: str
    k: int

    def __post_init__(self):
        if self.backend == "quantum":
            assert self.up_calls == self.attempts * (2 * self.k + 1)
        else:
            assert self.up_calls == self.attempts


def _uniform_index(rng: np.random.Generator, n: int) -> int:
    # One underlying draw per call keeps paired backends stream-aligned.
    return min(int(rng.random() * n), n - 1)


def _geometric(rng: np.random.Generator, p: float) -> int:
    """Number of Bernoulli(p) trials up to and including the first success."""
    if p >= 1.0:
        rng.random()
        return 1
    u = rng.random()
    return int(math.floor(math.log1p(-u) / math.log1p(-p))) + 1


def _sample_from(dist: np.ndarray, rng: np.random.Generator) -> int:
    u = rng.random()
    return min(int(np.searchsorted(np.cumsum(dist), u, side="right")), len(dist) - 1)


def deliberate(
    dist: StationaryDistribution,
    backend: str,
    rng: np.random.Generator,
    attempt_cap: int = ATTEMPT_CAP,
) -> DeliberationRecord:
    """Repeat prepare/measure cycles until a flagged action is sampled.

    The quantum backend measures the amplified distribution at cost 2k+1
    preparation calls per attempt; the classical backend samples the
    stationary distribution at cost 1.  Exceeding ``attempt_cap`` signals a
    mis-specified distribution and raises RuntimeError.
    """
    if backend not in ("quantum", "classical"):
        raise ValueError(f"unknown backend {backend!r}")
    eps = dist.epsilon
    if eps <= 0.0:
        raise ValueError("deliberation requires a positive flagged weight")
    if backend == "quantum":
        k = optimal_k(eps)
        outcome_dist = run_ideal_distribution(dist, k)
        calls_per_attempt = 2 * k + 1
    else:
        k = 0
        outcome_dist = np.asarray(dist.a, dtype=float)
        calls_per_attempt = 1
    flagged = set(dist.flagged)
    for attempt in range(1, attempt_cap + 1):
        action = _sample_from(outcome_dist, rng)
        if action in flagged:
            return DeliberationRecord(
                action=action,
                attempts=attempt,
                up_calls=attempt * calls_per_attempt,
                backend=backend,
                k=k,
            )
    raise RuntimeError(f"no flagged action within {attempt_cap} attempts; check epsilon")


def classical_cost_curve(
    epsilons: list[float], runs: int, rng: np.random.Generator
) -> list[tuple[float, float]]:
    """Monte Carlo mean sampling cost per epsilon; consistent with 1/eps."""
    if runs < 1:
        raise ValueError("runs must be >= 1")
    out = []
    for eps in epsilons:
        if not 0.0 < eps <= 1.0:
            raise ValueError(f"epsilon {eps} outside (0, 1]")
        u = rng.random(runs)
        if eps >= 1.0:
            attempts = np.ones(runs)
        else:
            attempts = np.floor(np.log1p(-u) / math.log1p(-eps)) + 1.0
        out.append((eps, float(attempts.mean())))
    return out


@dataclass(frozen=True)
class LearningStep:
    """One environment interaction: flag count, flagged weight, running cost."""

    n_flagged: int
    epsilon: float
    up_calls: int
    rewarded: bool


def learning_demo(
    num_actions: int,
    rewarded: set[int],
    backend: str,
    rng: np.random.Generator,
) -> list[LearningStep]:
    """Flag-based short-term memory demo on a uniform stationary distribution.

    All actions start flagged; an unrewarded action loses its flag, so the
    flagged weight eps_t = n_t / N shrinks until a rewarded action is drawn.
    Costs use the closed-form success model, so ``num_actions`` may exceed 4.
    The quantum agent falls back to direct sampling (k = 0) whenever
    amplification would cost more than 1/eps expected calls.

    Each interaction consumes exactly two underlying draws (attempt count,
    then action choice), so both backends visit the same action sequence for
    the same seed.
    """
    if num_actions < 2:
        raise ValueError("num_actions must be >= 2")
    if backend not in ("quantum", "classical"):
        raise ValueError(f"unknown backend {backend!r}")
    rewarded = set(rewarded)
    if not rewarded:
        raise ValueError("rewarded set must be non-empty")
    if not rewarded <= set(range(num_actions)):
        raise ValueError("rewarded actions out of range")

    flags = list(range(num_actions))
    trace: list[LearningStep] = []
    total_calls = 0
    while True:
        if not set(flags) & rewarded:
            raise RuntimeError("policy exhausted: all rewarded actions unflagged")
        eps = len(flags) / num_actions
        if backend == "quantum":
            k = optimal_k(eps)
            success = grover_success(eps, k)
            if (2 * k + 1) / success > 1.0 / eps:
                k, success = 0, eps
            attempts = _geometric(rng, success)
            total_calls += attempts * (2 * k + 1)
        else:
            attempts = _geometric(rng, eps)
            total_calls += attempts
        action = flags[_uniform_index(rng, len(flags))]
        hit = action in rewarded
        trace.append(LearningStep(len(flags), eps, total_calls, hit))
        if hit:
            return trace
        flags.remove(action)
