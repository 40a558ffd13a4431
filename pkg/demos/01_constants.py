# %% [markdown]
# # Model constants
# lambda_s = Gamma(1/s)^s / (s^s s!) is the expected number of ways a large
# integer is written as a sum of s members of A. Its reciprocal is the
# almost-sure limsup of normalized sumset gaps.

# %%
import math

from pseudopowers import gamma_reciprocal_power, gap_constant, lambda_s

for s in (2, 3, 4, 5):
    print(f"s={s}  Gamma(1/s)={gamma_reciprocal_power(s):.12f}  "
          f"lambda_s={lambda_s(s):.10f}  1/lambda_s={gap_constant(s):.6f}")

# %%
# s = 2 has a closed form: lambda_2 = pi/8
print("lambda_2 - pi/8 =", lambda_s(2) - math.pi / 8)
