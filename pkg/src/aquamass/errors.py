"""Exception and warning types shared across the package."""


class AquamassError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(AquamassError, ValueError):
    """Input bytes are not well-formed (bad JSON, bad encoding)."""

    def __init__(self, message, line=None, column=None, offset=None):
        self.line = line
        self.column = column
        self.offset = offset
        if line is not None:
            message = f"{message} (line {line}, column {column}, byte {offset})"
        super().__init__(message)


class FormatError(AquamassError, ValueError):
    """A binary file has the wrong magic number or a broken header."""


class ValidationError(AquamassError, ValueError):
    """Well-formed input that violates a documented invariant."""

    def __init__(self, message, frame_id=None, instance_index=None):
        self.frame_id = frame_id
        self.instance_index = instance_index
        where = []
        if frame_id is not None:
            where.append(f"frame {frame_id!r}")
        if instance_index is not None:
            where.append(f"instance {instance_index}")
        if where:
            message = f"{', '.join(where)}: {message}"
        super().__init__(message)


class DomainError(AquamassError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class UnknownClassError(AquamassError, KeyError):
    def __init__(self, class_name, known):
        self.class_name = class_name
        self.known = sorted(known)
        super().__init__(f"unknown class {class_name!r}; known classes: {', '.join(self.known)}")

    def __str__(self):
        return self.args[0]


class DegenerateGeometry(UserWarning):
    """A polygon rasterized to zero pixels."""


class RegenerativeRegime(UserWarning):
    """Motor torque came out negative (shaft speed above no-load speed)."""


class SkippedClass(UserWarning):
    """A class had no ground truth and was left out of the metrics."""
