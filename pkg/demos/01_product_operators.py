"""
Product operators for three spins
=================================

The 63 product operators built from spin-1/2 matrices span the traceless
part of the 8x8 Hermitian matrices.  Hard pulses move a propagator around
inside its subspace without costing evolution time.
"""

import numpy as np

from gatesmith import Generator, ProductOperator, basis_operators, hard_pulse, propagator, realize

###############################################################################
# The basis, grouped by subspace
ops = basis_operators()
counts = {}
for op in ops:
    counts[op.subspace] = counts.get(op.subspace, 0) + 1
print(len(ops), "operators:", counts)

###############################################################################
# Trace orthogonality: Tr(A B) = 2 for A = B, zero otherwise
gram = np.array([[np.trace(realize(a) @ realize(b)).real for b in ops] for a in ops])
print("Gram matrix equals 2 I:", np.allclose(gram, 2 * np.eye(63)))

###############################################################################
# A trilinear rotation about I1x I2y I3z is the zzz rotation sandwiched
# between pi/2 pulses on spins 1 and 2
theta = 0.7
zzz = propagator(Generator("trilinear", ProductOperator.of("123", "zzz"), theta))
xyz = propagator(Generator("trilinear", ProductOperator.of("123", "xyz"), theta))
R = hard_pulse(1, "y", np.pi / 2) @ hard_pulse(2, "x", -np.pi / 2)
print("conjugation error:", np.linalg.norm(xyz - R @ zzz @ R.conj().T))

###############################################################################
# The same trick maps I1zI2z onto I1yI2y
zz = propagator(Generator("bilinear", ProductOperator.of("12", "zz"), theta))
yy = propagator(Generator("bilinear", ProductOperator.of("12", "yy"), theta))
R = hard_pulse(1, "x", -np.pi / 2) @ hard_pulse(2, "x", -np.pi / 2)
print("bilinear conjugation error:", np.linalg.norm(yy - R @ zz @ R.conj().T))
