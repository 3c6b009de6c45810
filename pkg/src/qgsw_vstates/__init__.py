"""Bifurcation of rotating doubly-connected vortex patches.

Numerical toolkit for uniformly rotating perturbations of an annular patch
in the quasi-geostrophic shallow-water model: modified-Bessel special
functions, the linearized spectrum with its mode thresholds, spectrally
accurate contour evaluation of the boundary functional, and Newton
continuation of the bifurcating branches.
"""

__version__ = "0.1.0"
