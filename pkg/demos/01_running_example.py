"""Walk through the 100-record health table: histograms, joints and the three measures."""
import numpy as np

from maskadvisor import joint, marginal, masked_joint, utility
from maskadvisor.datasets import running_example, young_old

d = running_example()
print(d)
print("Age histogram:", marginal(d, "Age").to_dict())

j = joint(d, "Age")
print("\nAge x Health (columns:", ", ".join(j.col_domain.values) + ")")
for value, row in zip(j.row_domain.values, j.cells.astype(int)):
    print(f"  {value:>3}  {row}")

for m in ("mi", "chi2", "g3"):
    print(f"{m:>5} on the true joint: {utility(m, j):.4f}")

# coarsen Age into two groups and see how much signal is left
mj = masked_joint(d, "Age", young_old())
print("\nmasked Age x Health")
for value, row in zip(mj.row_domain.values, mj.cells.astype(int)):
    print(f"  {value:>5}  {row}")
print(f"MI drops from {utility('mi', j):.3f} to {utility('mi', mj):.3f} bits")
print("rows sum to", np.asarray(mj.row_sums(), dtype=int).tolist())
