"""Exception types shared across the package."""


class GenuniqError(Exception):
    pass


class ModelSyntaxError(GenuniqError):
    """Malformed model file text. Carries a 1-based line/column."""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.message = message
        self.line = line
        self.column = column
        loc = f"line {line}, column {column}: " if line else ""
        super().__init__(f"{loc}{message}")


class ModelError(GenuniqError):
    """Structurally invalid model (dimension mismatch, bad variable index, ...)."""


class PoleError(GenuniqError):
    """A row denominator vanished (relative to the pole guard)."""

    def __init__(self, row: int):
        self.row = row
        super().__init__(f"pole guard failed at row {row}")


class TransformSingular(GenuniqError):
    def __init__(self, coord: int):
        self.coord = coord
        super().__init__(f"transform coordinate f{coord} is singular at this point")


class SamplingExhausted(GenuniqError):
    """Too many random draws hit poles to form an estimate."""
