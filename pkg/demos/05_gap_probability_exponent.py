# %% [markdown]
# # How fast does P(no sum in [i, i + alpha ln i]) decay?
# Heuristically like i^(-alpha lambda_s); for s = 2, alpha = 2 the log-log
# slope should sit near -pi/4.

# %%
import math

from pseudopowers import exponent_fit, montecarlo_gap_probability

points = []
for i in (100, 200, 400, 800):
    est, se = montecarlo_gap_probability(2, i, 2.0, trials=20_000, seed=0)
    points.append((i, est))
    print(f"i={i:>4}  P={est:.5f} +- {se:.5f}")

# %%
fit = exponent_fit(points)
print(f"slope {fit.slope:.3f} (target {-math.pi / 4:.3f}), r^2 {fit.r_squared:.3f}")
