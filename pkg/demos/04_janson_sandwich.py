# %% [markdown]
# # Janson's inequality on a small universe
# Events "n is represented by this support" for n in an interval; the
# probability that none occurs is pinned between the independent product
# and the product times exp(2 * dependence sum).

# %%
from pseudopowers import (build_system, dependence_sum, exact_gap_probability,
                          independent_product, janson_bounds, montecarlo_gap_probability)

system = build_system([4, 5], s=2, universe_cap=3)
for w in system.family:
    print("support", sorted(w.support), "prob", round(w.prob, 6))

# %%
lower, upper = janson_bounds(system)
exact = exact_gap_probability(2, 3, [4, 5])
est, se = montecarlo_gap_probability(2, interval=[4, 5], universe_cap=3, trials=100_000, seed=0)
print(f"product {independent_product(system):.7f}  Delta {dependence_sum(system):.7f}")
print(f"{lower:.7f} <= exact {exact:.7f} <= {upper:.7f}")
print(f"Monte Carlo {est:.5f} +- {se:.5f}")
