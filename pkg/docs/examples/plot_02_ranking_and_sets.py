"""
How many ranks can we trust?
============================

The ranking procedure verifies the observed order one rank at a time and
stops at the first rank it cannot confirm. The set procedure only asks
whether the top ``k`` groups are the right ones, in any order.
"""

from rankverify import Observations, rank_bottom, rank_top, topk_set_test

obs = Observations(
    values=[10.0, 9.9, 6.0, 3.0, 1.0],
    sds=[0.2, 0.2, 0.4, 0.3, 0.3],
    labels=("a", "b", "c", "d", "e"),
)

###############################################################################
# ``a`` and ``b`` are almost tied, so not even the first rank is verified.

top = rank_top(obs)
for step in top.per_rank:
    print(f"rank {step.rank} ({step.label}): p*={step.p_star:.3g}")
print("verified ranks from the top:", top.verified_count)

###############################################################################
# But the pair {a, b} clearly beats everything else.

for k in (1, 2, 3):
    res = topk_set_test(obs, k)
    print(f"top-{k} set {res.labels[:k]}: p*={res.p_star:.3g} verified={res.verified}")

###############################################################################
# Counting from the bottom works the same way on the reflected values.

print("verified ranks from the bottom:", rank_bottom(obs).verified_labels)
