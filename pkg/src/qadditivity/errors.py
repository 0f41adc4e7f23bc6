"""Exception types shared across the package."""


class QAdditivityError(Exception):
    """Base class for all package errors."""


class DimensionError(QAdditivityError, ValueError):
    pass


class NumericalFailure(QAdditivityError):
    """A numerical step could not be carried out (CLI exit code 3)."""


class SingularMap(NumericalFailure):
    """The reduced dynamical map is not invertible at time ``t``.

    ``grid_index`` is filled in when the failure happens inside a sweep.
    """

    def __init__(self, t, smallest_singular_value, side=None, grid_index=None):
        self.t = t
        self.smallest_singular_value = smallest_singular_value
        self.side = side
        self.grid_index = grid_index
        where = f" (side {side})" if side else ""
        at = f", grid index {grid_index}" if grid_index is not None else ""
        super().__init__(
            f"dynamical map not invertible at t={t!r}{where}{at}: "
            f"smallest singular value {smallest_singular_value:.3e}"
        )


class NotHPTA(NumericalFailure):
    """Superoperator is not hermiticity-preserving and trace-annihilating."""


class KossakowskiDiagonalizationFailure(NumericalFailure):
    pass


class SingularTime(NumericalFailure):
    """Closed-form quantity requested where |g(t)| vanishes."""

    def __init__(self, t, g_abs):
        self.t = t
        self.g_abs = g_abs
        super().__init__(f"|g(t)| = {g_abs:.3e} vanishes at t={t!r}")


class SingularPopulation(NumericalFailure):
    """Peak amplitude requested with the complementary population at 1/2."""


class DomainError(QAdditivityError):
    """Point outside the domain of an effective-Hamiltonian rule."""

    def __init__(self, reason):
        self.reason = reason
        super().__init__(reason)


class ConfigError(QAdditivityError):
    """Invalid scenario configuration (CLI exit code 2)."""

    def __init__(self, message, field=None, line=None):
        self.field = field
        self.line = line
        loc = []
        if line is not None:
            loc.append(f"line {line}")
        if field:
            loc.append(f"field '{field}'")
        prefix = f"{', '.join(loc)}: " if loc else ""
        super().__init__(prefix + message)
