"""Success metrics: fraction solved, gap, residual and R99 with bootstrapped medians."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np


class ResidualUndefinedError(ZeroDivisionError):
    """Residual requested against a zero best-known energy; ``gap`` is still available."""

    def __init__(self, gap):
        super().__init__("residual is undefined when the best known energy is 0")
        self.gap = gap


def gap_and_residual(best_found, best_known):
    """``(best_found - best_known, 100 * (best_found - best_known) / |best_known|)``."""
    gap = best_found - best_known
    if best_known == 0:
        raise ResidualUndefinedError(gap)
    return gap, 100.0 * gap / abs(best_known)


def hits(energies, best_known, rtol=1e-9):
    """Boolean mask of energies matching the best known value.

    The tolerance is relative to ``max(1, |best_known|)``; for integer energies
    below 1e9 in magnitude it amounts to exact equality.
    """
    return np.asarray(energies) <= best_known + rtol * max(1.0, abs(best_known))


@dataclass
class InstanceResult:
    best_known: float
    found_energies: list
    total_sample_per_start: int
    solved_tolerance: float = 1e-9
    mode: str = "spvar"
    instance_id: str = ""

    def __post_init__(self):
        if not self.found_energies or any(len(e) == 0 for e in self.found_energies):
            raise ValueError("every start needs at least one recorded energy")
        if not math.isfinite(self.best_known):
            raise ValueError("best_known must be finite")

    @property
    def best_found(self):
        return min(float(np.min(e)) for e in self.found_energies)

    @property
    def solved(self):
        return bool(hits([self.best_found], self.best_known, self.solved_tolerance)[0])

    def start_successes(self):
        return [bool(np.any(hits(e, self.best_known, self.solved_tolerance)))
                for e in self.found_energies]

    def read_success_probability(self):
        allE = np.concatenate([np.asarray(e, dtype=float) for e in self.found_energies])
        return float(np.mean(hits(allE, self.best_known, self.solved_tolerance)))

    def r99(self):
        if self.mode == "spvar":
            return r99_spvar(self.start_successes(), self.total_sample_per_start)
        return r99(self.read_success_probability())


def fraction_solved(results):
    if not results:
        raise ValueError("no instance results")
    return sum(r.solved for r in results) / len(results)


def r99(p):
    """Sample size that sees a success with 99% confidence; ``None`` if ``p == 0``."""
    if p > 1 or p < 0 or math.isnan(p):
        raise ValueError(f"success probability must lie in [0, 1], got {p}")
    if p == 0:
        return None
    if p == 1:
        return 1
    return max(1, math.ceil(math.log(0.01) / math.log1p(-p) - 1e-9))


def r99_spvar(per_start_success, total_sample_per_start):
    """Starts needed at the mean per-start success rate, times the sample per start."""
    flags = list(per_start_success)
    if not flags:
        raise ValueError("no starts")
    starts = r99(sum(map(bool, flags)) / len(flags))
    return None if starts is None else starts * total_sample_per_start


def lower_median(values):
    """Median taking the lower middle order statistic for even lengths."""
    v = np.sort(np.asarray(values, dtype=float))
    if len(v) == 0:
        raise ValueError("median of empty sequence")
    return float(v[(len(v) - 1) // 2])


def bootstrap_median(values, B=1000, seed=0):
    """Mean of ``B`` bootstrap medians and their 2.5/97.5 percentile interval."""
    v = np.asarray(values, dtype=float)
    if len(v) == 0:
        raise ValueError("cannot bootstrap an empty sequence")
    if B < 1:
        raise ValueError("B must be >= 1")
    rng = np.random.default_rng(seed)
    resamples = np.sort(v[rng.integers(0, len(v), size=(B, len(v)))], axis=1)
    medians = resamples[:, (len(v) - 1) // 2]
    lo, hi = np.percentile(medians, [2.5, 97.5])
    return float(medians.mean()), (float(lo), float(hi))


@dataclass
class MetricsReport:
    num_instances: int
    fraction_solved: float
    gap: float
    residual: float | None
    r99: float | None
    r99_ci: tuple | None
    r99_measured: int
    median_is_lower_bound: bool
    fixed_fraction: float | None = None
    extra: dict = field(default_factory=dict)

    def as_record(self):
        return asdict(self)


def summarize(results, B=1000, seed=0, fixed_fractions=None) -> MetricsReport:
    """Aggregate one instance set.

    Gap and residual are lower medians over instances (residual skips
    instances whose best known energy is 0). R99 is the bootstrapped median
    over instances whose R99 could be measured; with fewer than half the
    instances solved it only bounds the true median from below.
    """
    frac = fraction_solved(results)
    gaps, residuals, r99s = [], [], []
    for r in results:
        try:
            g, res = gap_and_residual(r.best_found, r.best_known)
            residuals.append(res)
        except ResidualUndefinedError as exc:
            g = exc.gap
        gaps.append(g)
        value = r.r99()
        if value is not None:
            r99s.append(value)
    if r99s:
        mean, ci = bootstrap_median(r99s, B, seed)
    else:
        mean, ci = None, None
    return MetricsReport(
        num_instances=len(results),
        fraction_solved=frac,
        gap=lower_median(gaps),
        residual=lower_median(residuals) if residuals else None,
        r99=mean,
        r99_ci=ci,
        r99_measured=len(r99s),
        median_is_lower_bound=frac < 0.5,
        fixed_fraction=lower_median(fixed_fractions) if fixed_fractions else None,
    )


def format_table(reports: dict) -> str:
    """Plain-text table, one row per ``name -> MetricsReport``."""
    head = f"{'set':<24}{'n':>5}{'solved':>9}{'gap':>12}{'resid%':>10}{'R99':>12}  R99 95% CI"
    lines = [head, "-" * len(head)]
    fmt = lambda x, spec: "-" if x is None else format(x, spec)
    for name, r in reports.items():
        ci = "-" if r.r99_ci is None else f"[{r.r99_ci[0]:.4g}, {r.r99_ci[1]:.4g}]"
        flag = " (lower bound)" if r.median_is_lower_bound and r.r99 is not None else ""
        lines.append(f"{name:<24}{r.num_instances:>5}{r.fraction_solved:>9.3f}"
                     f"{fmt(r.gap, '.4g'):>12}{fmt(r.residual, '.4g'):>10}"
                     f"{fmt(r.r99, '.5g'):>12}  {ci}{flag}")
    return "\n".join(lines)
