"""Exception types shared across the package."""


class ContractError(ValueError):
    """A caller violated an operation's contract (bad argument, wrong state)."""


class DimensionError(ContractError):
    """Array shapes are incompatible with the layer or network they met."""


class DomainError(ContractError):
    """A numeric value lies outside the mathematical domain of an operation."""


class StructureError(ContractError):
    """A trie is structurally unusable for the requested operation."""


class FormatError(ValueError):
    """An input file does not follow the expected format."""
