"""brlab: Bochner–Riesz computational harmonic-analysis toolkit"""
from brlab.errors import (BrlabError, ConfigError, ConstructionError, DomainError,
                          InfeasibleError, InputError, NumericalError, SingularSetError)

__version__ = "0.1.0"

__all__ = [
    "BrlabError",
    "ConfigError",
    "ConstructionError",
    "DomainError",
    "InfeasibleError",
    "InputError",
    "NumericalError",
    "SingularSetError",
    "__version__",
]
