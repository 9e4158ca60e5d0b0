"""The masking kinds, their inverse images, and a materialized masked view."""
import sys

from maskadvisor import MaskingConfiguration, MaskingFunction, apply_mask, inverse_image
from maskadvisor.datasets import excerpt, running_example
from maskadvisor.masking import mask_dataset, write_csv

samples = [
    (MaskingFunction.blur_numeric(10), "53.5"),
    (MaskingFunction.blur_prefix(3), "12345"),
    (MaskingFunction.bucketize(5), "31"),
    (MaskingFunction.generalize_ranges([(10, 45, "Young"), (45, None, "Old")]), "43"),
    (MaskingFunction.suppress(), "21162"),
]
for f, value in samples:
    print(f"{f.kind:<13} {value!r:>9} -> {apply_mask(f, value)!r}")

d = running_example()
inv = inverse_image(MaskingFunction.bucketize(20, origin=10), d.domains["Age"])
print("\nAge buckets of width 20:")
for mv in inv.masked_domain.values:
    print(f"  {mv:<9} <- {list(inv.preimages[mv])}")

config = MaskingConfiguration("view", (
    ("Age", MaskingFunction.generalize_ranges([(10, 45, "Young"), (45, None, "Old")])),
    ("Weight", MaskingFunction.bucketize(5)),
    ("Zip", MaskingFunction.identity()),
))
print("\nmasked preview table:")
write_csv(mask_dataset(excerpt(), config), sys.stdout)
