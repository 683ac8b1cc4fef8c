"""Numerical toolkit for the Darboux equation on the torus.

Modules
-------
elliptic
    Jacobi/Weierstrass functions, theta functions, lattice data.
hypergeom
    Gauss 2F1, gamma function, contiguous relations.
recurrence
    Three-term recurrences: forward/backward runs, continued fractions,
    Perron classification, tridiagonal spectra.
darboux
    Local series solutions, termination spectra, Darboux functions,
    symmetries.
derivation
    Symbolic and multiple-precision re-derivation of both recurrences.
odeverify
    Complex-path integration, ODE residuals, monodromy.
connection
    Traceless 2x2 Fuchsian systems on the torus and their scalar reduction.
painleve
    Painleve VI residuals, special conditions, Manin symmetries and the
    correspondence scan.
cli
    Command-line front end (``darbouxlab``).
"""

from .darboux import DarbouxParams

__version__ = "0.1.0"

__all__ = ["DarbouxParams", "__version__"]
