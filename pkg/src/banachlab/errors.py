"""Exception types shared across the package."""


class BanachLabError(Exception):
    """Base class for all package errors."""


class ChainError(BanachLabError, ValueError):
    """A subgroup chain is not nested or does not start at 0 / end at G."""


class SectionError(BanachLabError, ValueError):
    """A user supplied section is not a section of the projection."""


class CocycleError(BanachLabError, ValueError):
    """Base class for cocycle validation failures."""


class NotBiadditiveError(CocycleError):
    pass


class NotUnitaryError(CocycleError):
    pass


class NotCommutingError(CocycleError):
    pass


class CompatibilityError(CocycleError):
    """kappa(x, y) is not the identity for x in G_i, y in Gbar^i."""


class HypothesisError(BanachLabError, ValueError):
    """The hypothesis of an inequality is not met by the concrete inputs."""


class IndexMismatchError(BanachLabError, ValueError):
    pass


class BudgetError(BanachLabError, RuntimeError):
    """A requested computation exceeds its exhaustion or memory budget."""
