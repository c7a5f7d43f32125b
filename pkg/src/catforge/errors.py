"""Exception types shared across the package."""


class CatforgeError(Exception):
    """Base class for all catforge errors."""


class DegenerateCatError(CatforgeError):
    """Requested cat state is the zero vector (odd cat with beta = 0)."""


class PoleError(CatforgeError):
    """Evaluation at a pole of G, i.e. sin(Gamma*tau/2) = 0 with tau > 0."""


class NoSolutionError(CatforgeError):
    """Design target cannot be reached before the first pole of G."""


class EngineError(CatforgeError):
    """Dyad-engine failure, e.g. zero trace after post-selection."""


class CutoffError(CatforgeError):
    """Fock cutoff too small for the requested amplitude or evolution."""
