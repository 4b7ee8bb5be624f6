"""dimerlab: a laboratory for 3D dimer tilings and their flows.

Regions, tilings, divergence-free tiling flows, exact tileability with Hall
certificates, loop-shift Monte Carlo, local-move invariants, double-dimer
chain swapping, boundary entropy, and a generalized Wasserstein metric on
flows.
"""

__version__ = "0.1.0"
