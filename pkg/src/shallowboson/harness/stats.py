"""Distribution distances and the sampler validation report."""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import asdict, dataclass, field

from scipy import stats


def tvd(p: dict, q: dict) -> float:
    """Total variation distance between two pmfs given as ``outcome -> probability``."""
    keys = set(p) | set(q)
    return 0.5 * sum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys)


def empirical(outcomes) -> dict:
    counts = Counter(outcomes)
    total = sum(counts.values())
    return {k: v / total for k, v in counts.items()}


def chi_square(counts: dict, expected: dict, samples: int, min_expected: float = 5.0):
    """Pearson statistic, degrees of freedom and p-value.

    Outcomes with fewer than ``min_expected`` expected counts are pooled into
    one cell; observations outside the expected support join that cell too.
    """
    stat, cells = 0.0, 0
    pooled_obs, pooled_exp = 0.0, 0.0
    for k, p in expected.items():
        e = p * samples
        o = counts.get(k, 0)
        if e >= min_expected:
            stat += (o - e) ** 2 / e
            cells += 1
        else:
            pooled_obs += o
            pooled_exp += e
    pooled_obs += sum(v for k, v in counts.items() if k not in expected)
    if pooled_exp > 0:
        stat += (pooled_obs - pooled_exp) ** 2 / pooled_exp
        cells += 1
    dof = max(cells - 1, 1)
    return stat, dof, float(stats.chi2.sf(stat, dof))


@dataclass
class ValidationReport:
    tvd: float
    chi_square: float
    dof: int
    p_value: float
    samples: int
    threshold: float
    passed: bool
    table: list = field(default_factory=list)  # (outcome, expected, observed frequency)

    def to_json(self) -> str:
        doc = asdict(self)
        doc["table"] = [{"occupation": list(o), "expected": e, "observed": f} for o, e, f in self.table]
        return json.dumps(doc, indent=2)


def validate_counts(counts: dict, expected: dict, threshold: float) -> ValidationReport:
    """Compare observed outcome counts with an exact pmf."""
    samples = sum(counts.values())
    observed = {k: v / samples for k, v in counts.items()}
    d = tvd(observed, expected)
    stat, dof, pval = chi_square(counts, expected, samples)
    table = [(k, expected.get(k, 0.0), observed.get(k, 0.0)) for k in sorted(set(expected) | set(observed))]
    return ValidationReport(d, stat, dof, pval, samples, threshold, d < threshold, table)
