"""Exception types shared across the package."""

from __future__ import annotations


class WordProbError(Exception):
    """Base class for all package-specific errors."""


class GroupConstructionError(WordProbError):
    """A group table or generating set failed validation."""


class GroupSpecError(WordProbError):
    """A group spec id could not be parsed or built."""


class WordSyntaxError(WordProbError):
    """Word text failed to parse; carries the offending position."""

    def __init__(self, message: str, position: int) -> None:
        super().__init__(f"{message} (at position {position})")
        self.position = position


class ChainFormError(WordProbError):
    """A word required to be a left-normed chain is not one."""


class NormalityError(WordProbError):
    """A quotient was requested by a subgroup that is not normal."""


class BudgetExceededError(WordProbError):
    """An exhaustive computation would exceed the configured budget."""
