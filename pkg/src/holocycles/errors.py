"""Exception types raised by the numerical pipeline.

Certificates never raise; they carry failing clauses as data.  Everything
below signals that a computation could not be carried out at all.
"""


class HoloError(Exception):
    """Base class for all errors raised by holocycles."""

    #: short name of the pipeline stage, filled in by callers that know it
    stage: str | None = None

    def __init__(self, message: str = "", stage: str | None = None):
        super().__init__(message)
        if stage is not None:
            self.stage = stage


class NotComplexHyperbolic(HoloError):
    pass


class DegenerateField(HoloError):
    pass


class SingularEncounter(HoloError):
    pass


class NoConvergence(HoloError):
    pass


class DomainError(HoloError):
    pass


class NoAdmissibleDirection(HoloError):
    pass


class OnSeparatrix(HoloError):
    pass


class GermVanishes(HoloError):
    pass


class ContractionViolated(HoloError):
    pass


class AssemblyError(HoloError):
    pass


class NotClosed(HoloError):
    pass


class TooLarge(HoloError):
    pass


class NotInvariantLine(HoloError):
    pass


class InvariantLine(HoloError):
    pass
