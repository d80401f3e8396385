"""Exception hierarchy shared by every polycheck component.

Library code raises these; only the command line driver turns them into exit
codes.
"""


class PolyCheckError(Exception):
    """Base class for all input, validation and evaluation failures."""


class ConfigError(PolyCheckError):
    pass


class ModelFormatError(PolyCheckError):
    """Malformed model document; `path` points into the JSON structure."""

    def __init__(self, message, path="$"):
        super().__init__(f"{path}: {message}")
        self.path = path


class ModelValidationError(PolyCheckError):
    def __init__(self, report):
        kinds = sorted({v.kind for v in report.violations})
        super().__init__(
            f"model is not a simplicial complex: {len(report.violations)} violation(s) ({', '.join(kinds)})"
        )
        self.report = report


class SatSizeError(PolyCheckError, ValueError):
    pass


class ObjFormatError(PolyCheckError):
    def __init__(self, message, line=None, source="obj"):
        where = f"{source}:{line}" if line is not None else source
        super().__init__(f"{where}: {message}")
        self.line = line


class ConvertConfigError(PolyCheckError):
    pass


class ScriptSyntaxError(PolyCheckError):
    def __init__(self, message, line, column):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class ScriptExpansionError(PolyCheckError):
    pass


class UnknownAtomError(PolyCheckError):
    def __init__(self, atom, available, label=None):
        prefix = f'save "{label}": ' if label is not None else ""
        listed = ", ".join(available) if available else "none"
        super().__init__(f"{prefix}unknown atom '{atom}' (available: {listed})")
        self.atom = atom
        self.available = list(available)
        self.label = label

    def for_label(self, label):
        return UnknownAtomError(self.atom, self.available, label)


class ResultsError(PolyCheckError):
    pass


class EnrichError(PolyCheckError):
    pass


class BlockCapExceeded(PolyCheckError):
    def __init__(self, block_count, block_cap):
        super().__init__(
            f"partition reached {block_count} blocks, above the oracle cap of {block_cap}"
        )
        self.block_count = block_count
        self.block_cap = block_cap


class ExportError(PolyCheckError):
    pass
