"""macrolab: symbolic and numerical verification of fluid-moment bounds for
linearized kinetic equations in mirror-walled ellipsoidal domains.

Modules
-------
symkernel    exact polynomial algebra over Q(i) with ideal reduction
adnverify    complementing-condition computation for the symmetric Poisson system
mesh         tetrahedral meshes of balls, spheroids and ellipsoids
ellipticfem  P1 solver for the symmetric Poisson system with slip conditions
kinetics     Gauss-Hermite velocity grid, moments, test functions, sigma, BGK
estimatelab  transport simulator and evaluation of the L2 and L6 estimates
ensemble     frozen estimate ensemble and its calibration
cli          command-line entry point
"""

__version__ = "0.1.0"
