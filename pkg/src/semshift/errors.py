"""Exception types. User/input problems derive from :class:`SemshiftError`."""


class SemshiftError(ValueError):
    pass


class EmbeddingFormatError(SemshiftError):
    def __init__(self, message: str, lineno: int | None = None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class UnknownWordError(SemshiftError, KeyError):
    def __init__(self, word: str, where: str | None = None):
        self.word = word
        loc = f" in {where!r}" if where else ""
        super().__init__(f"unknown word {word!r}{loc}")

    def __str__(self):
        return self.args[0]


class AnchorError(SemshiftError):
    pass


class DivergenceError(SemshiftError):
    def __init__(self, iteration: int, loss: float):
        self.iteration = iteration
        self.loss = loss
        super().__init__(f"map training diverged at iteration {iteration} (loss={loss})")


class InvariantError(RuntimeError):
    """An internal consistency check failed; indicates a bug rather than bad input."""
