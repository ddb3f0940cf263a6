"""Turning a binary quantum example into a multiclass one.

A binary target c labels each point with 0 or 1. Given two witness maps
f0 and f1 that disagree everywhere, the reversible circuit rewrites the
label register to f_{c(x)}(x) and leaves every scratch register clean.
"""

import numpy as np

from qlearnlab.core import Distribution
from qlearnlab.quantum import (
    RegisterLayout,
    binary_to_multiclass_transform,
    drop_ancillas,
    embed,
    prepare_realizable_example,
    sample_outcomes,
    decode_example,
)

D = Distribution([0.5, 0.25, 0.25])
c = (1, 0, 1)
f0, f1 = (0, 1, 2), (2, 0, 1)

state = prepare_realizable_example(D, c, RegisterLayout.example(3, 2))
wide = embed(state, RegisterLayout.reduction(3, 3))
print("qubits used by the circuit:", wide.num_qubits)

out = drop_ancillas(binary_to_multiclass_transform(wide, f0, f1))
expected = tuple((f1 if c[x] else f0)[x] for x in range(3))
print("expected multiclass target:", expected)

counts = {}
for m in sample_outcomes(out, np.random.default_rng(0), 4000):
    xy = decode_example(out.layout, int(m))
    counts[xy] = counts.get(xy, 0) + 1
for (x, y), cnt in sorted(counts.items()):
    print(f"  x={x} y={y}: {cnt / 4000:.3f} (D(x) = {D.probs[x]})")
