# Two roads to the same circle bundle.
#
# Distance spheres around the soul are S^2 x S^1 with a submersion metric.
# The same metric arises from a product S^2 x S^1(r) after a Cheeger
# rescale.  Each route has its own fiber-length formula; a change of
# variables maps one into the other exactly.

import numpy as np

from soul_lab import (
    fiber_length_product,
    fiber_length_submersion,
    match_parameters,
)

print("a        submersion     product(matched)   difference")
for a in (1.0, 2.0, np.pi, 5.0):
    m = match_parameters(a)
    for x2 in (0.0, 0.3 * a * a, 0.8 * a * a):
        L1 = fiber_length_submersion(a, x2)
        L2 = fiber_length_product(m.r, m.xhat2(x2))
        print(f"{a:<8.4f} {L1:<14.10f} {L2:<18.10f} {L1 - L2:+.2e}")

# the matched product radius r = a / sqrt(4 pi^2 - a^2) blows up as the
# submersion circle approaches circumference 2 pi -- there is no product
# picture beyond it
for a in (6.0, 6.28):
    m = match_parameters(a)
    print(f"a = {a}: matched r = {m.r:.3f}")
