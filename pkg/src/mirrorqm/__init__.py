"""Space-time symmetric detection statistics for non-relativistic particles.

Modules:

- ``core``: grids, sampled fields, momentum spectra
- ``spectral``: Fourier representations and the half-derivative
- ``arrival``: mirror amplitudes, arrival-time density, Schrodinger reference
- ``stationary``: Poisson detection of stationary states, Lorentzian lines
- ``bayes``: joint densities, conditionals, event sampling
"""

from .core import (
    NATURAL,
    ComplexField,
    Grid1D,
    JointAmplitude,
    JointDensity,
    MomentumSpectrum,
    NumericalGuardError,
    PhysicalConstants,
    PseudoSpinorField,
    RealField,
    gaussian_spectrum,
    make_grid,
    normalize_spectrum,
)

__version__ = "0.1.0"
