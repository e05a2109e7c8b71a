"""Human-centered evaluation math: Likert normalization, aggregation,
correlations, and vanilla-vs-enhanced accuracy comparison.

Run from the repository root:  python3 demos/07_evaluation_math.py
"""

import numpy as np

from kgexplain import LikertResponse, accuracy_compare, aggregate, normalize_likert, pearson
from kgexplain.evalkit import METRIC_KEYS, build_report

print("three-point scale onto [0, 1]:", {v: normalize_likert(v) for v in (1, 2, 3)})

# Simulated review sheets: 12 evaluators x 5 instances, biased toward agree.
rng = np.random.default_rng(0)
responses = []
for evaluator in range(12):
    for instance in range(5):
        base = int(rng.integers(1, 4))
        answers = {}
        for metric in METRIC_KEYS:
            value = base if rng.random() < 0.6 else int(rng.integers(1, 4))
            answers[metric] = value
        responses.append(LikertResponse(f"e{evaluator}", f"i{instance}", answers))

for metric in ("overall_quality", "understandability", "trustworthiness"):
    agg = aggregate(responses, metric)
    print(f"{metric:<18} mean={agg.mean:.2f} variance={agg.variance:.2f} median={agg.median:.2f}")

report = build_report(responses)
print("\ncorrelations over per-instance means:")
for pair, rho in report.correlations.items():
    print(f"  {pair}: {rho:+.2f}")

x = [0.1, 0.4, 0.5, 0.8, 0.9]
print("\npearson of a perfectly linear pair:", pearson(x, [2 * v + 1 for v in x]))

# The 20-question protocol: accuracy with and without retrieval enhancement.
comparison = accuracy_compare({
    "small-chat": (10, 12, 20),
    "large-chat": (11, 15, 20),
    "open-8b": (9, 10, 20),
})
for model, acc in comparison.per_model.items():
    print(f"{model:<12} vanilla={acc.vanilla:.2f} enhanced={acc.enhanced:.2f} delta={acc.delta:+.2f}")
print(f"largest gain: {comparison.best_model} ({comparison.best_delta:+.2f})")
