"""Exception hierarchy.

Every error carries an ``exit_code`` so the command line can map failures
onto its fixed contract (2 validation, 3 model degeneracy, 4 I/O,
5 resource) without a lookup table.
"""


class AutlerCavityError(Exception):
    exit_code = 1


class ParameterError(AutlerCavityError, ValueError):
    """Invalid or missing physical input. ``key`` names the offending field."""

    exit_code = 2

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key


class UnknownPreset(AutlerCavityError, KeyError):
    exit_code = 2

    def __str__(self):
        return str(self.args[0]) if self.args else "unknown preset"


class NoSignChange(AutlerCavityError, ValueError):
    exit_code = 2


class GridError(AutlerCavityError, ValueError):
    exit_code = 2


class PeakTooCoarse(GridError):
    pass


class GridTooNarrow(GridError):
    pass


class ModelDegeneracy(AutlerCavityError):
    exit_code = 3


class SingularGenerator(ModelDegeneracy):
    pass


class GeneratorNotDamped(ModelDegeneracy):
    pass


class NonPhysicalState(ModelDegeneracy):
    pass


class DegenerateSteadyState(ModelDegeneracy):
    pass


class DimensionOverflow(AutlerCavityError):
    exit_code = 5
