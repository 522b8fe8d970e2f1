"""
Exception hierarchy shared by the library and the command-line front end

The CLI maps ConfigError to exit code 2, NumericalRejection to 3 and
GridTooLarge to 4.
"""
from typing import Optional


class SemSchedError(Exception):
    """Root of all errors raised by this package"""


class ConfigError(SemSchedError, ValueError):
    """Experiment config, grid file or policy spec could not be parsed"""


class NumericalRejection(SemSchedError, ArithmeticError):
    """
    A system or evaluation falls outside what the closed forms support

    Args:
        message: Human readable reason
        sensor: Zero-based index of the offending sensor, if known
    """

    def __init__(self, message: str, sensor: Optional[int] = None):
        super().__init__(message)
        self.sensor = sensor

    def with_sensor(self, sensor: int) -> "NumericalRejection":
        self.sensor = sensor
        return self

    def __str__(self):
        base = super().__str__()
        if self.sensor is None:
            return base
        return f"sensor {self.sensor + 1}: {base}"


class NonDiagonalizable(NumericalRejection):
    """Drift matrix is defective or its eigenvector basis is ill-conditioned"""


class Resonance(NumericalRejection):
    """An eigenvalue pair satisfies lambda_m + conj(lambda_n) = 0"""


class InvalidInterval(NumericalRejection):
    """An AoI interval with tau_lo > tau_hi (or a negative bound) was requested"""


class NegativeResult(NumericalRejection):
    """Packet-integrated MSE came out clearly negative"""


class DegenerateGeometricSum(NumericalRejection):
    """The expected loss over geometric retransmissions diverges"""


class SingularSystem(NumericalRejection):
    """The vectorized Lyapunov system has no unique solution"""


class StepTooCoarse(NumericalRejection):
    """Euler-Maruyama estimate moved by more than two standard errors on halving the step"""


class ZeroDuration(NumericalRejection):
    """A simulation covered no time to average over"""


class ImaginaryResidue(NumericalRejection):
    """A trace that must be real carried a large imaginary part"""


class GridTooLarge(SemSchedError, ValueError):
    """Parameter grid exceeds the configured size cap"""


class DimensionUnsupported(SemSchedError, ValueError):
    """Operation only defined for a particular number of sensors"""


class AllInfinite(SemSchedError, ValueError):
    """Every candidate point has an infinite MSE"""
