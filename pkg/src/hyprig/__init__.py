"""hyprig: volume cocycles, lattice smearing and boundary-map rigidity
in hyperbolic n-space."""

__version__ = "0.1.0"
