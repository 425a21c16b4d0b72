"""Exception hierarchy shared by every stage of the pipeline."""


class GenderCCAError(Exception):
    """Base class for data and numerical errors (CLI exit code 2)."""


class HeaderMismatch(GenderCCAError):
    pass


class MalformedLine(GenderCCAError):
    def __init__(self, line_no, message, source=None):
        self.line_no = line_no
        self.source = source
        where = f"{source}:{line_no}" if source else f"line {line_no}"
        super().__init__(f"{where}: {message}")


class UnknownGender(MalformedLine):
    pass


class EmptyDataset(GenderCCAError):
    pass


class DegenerateSplit(GenderCCAError):
    pass


class DegenerateInput(GenderCCAError):
    pass


class NumericalFailure(GenderCCAError):
    pass


class DimensionMismatch(GenderCCAError):
    pass


class ConfigError(GenderCCAError):
    pass


class MissingGenderClass(UserWarning):
    """Some inventory label has no retained nouns."""
