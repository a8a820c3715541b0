"""Extended probabilities for observables over quaternion and Clifford bimodules.

Modules
    hypercomplex   the two star-rings (quaternions, Cl(1,3)) and their matrix images
    bimodule       free modules of finite rank, ring-valued scalar products, operators
    spectral       left eigenbases with real eigenvalues, signed projections, compatibility
    extmeasure     renormalized outcome statistics, ordered joint tables, CHSH
    detector       Monte Carlo of integer detector colors
    verify         numerical identity suite
    cli            command-line entry point
"""

from .errors import (
    DegenerateState,
    ExtProbError,
    InvalidModel,
    NotCommuting,
    NotPhysical,
    NotPhysicalInput,
    RankMismatch,
    RingMismatch,
    UnknownEigenvalue,
    WeightSumInvalid,
)
from .hypercomplex import CLIFFORD, QUATERNION, CliffordElement, Quaternion

__version__ = "0.1.0"

__all__ = [
    "CLIFFORD", "QUATERNION", "CliffordElement", "Quaternion",
    "DegenerateState", "ExtProbError", "InvalidModel", "NotCommuting", "NotPhysical",
    "NotPhysicalInput", "RankMismatch", "RingMismatch", "UnknownEigenvalue", "WeightSumInvalid",
]
