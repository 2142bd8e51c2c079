"""Exception hierarchy and exit codes shared across the pipeline."""


class DocdriftError(Exception):
    """Base class for all pipeline errors. `exit_code` drives the CLI exit status."""

    exit_code = 1


class ConfigError(DocdriftError):
    """Invalid or missing configuration (flags, config file, environment)."""

    exit_code = 2


class CorpusError(DocdriftError):
    """The corpus root is unreadable or otherwise unusable."""

    exit_code = 3


class TransportError(DocdriftError):
    """A live or record request failed after bounded retries."""

    exit_code = 4


class FixtureError(DocdriftError):
    """Problems with the record/replay fixture store."""

    exit_code = 5


class FixtureMissError(FixtureError):
    """Replay requested a fixture key that is not in the store."""

    def __init__(self, key: str, detail: str = ""):
        self.key = key
        message = f"no fixture recorded for key {key}"
        if detail:
            message += f" ({detail})"
        super().__init__(message)


class FixtureConflictError(FixtureError):
    """Record mode tried to overwrite an existing fixture with different content."""

    def __init__(self, key: str):
        self.key = key
        super().__init__(
            f"fixture {key} already recorded with different content; "
            "delete it explicitly to re-record"
        )


class LabelError(DocdriftError):
    """Label files are malformed, duplicated, or do not cover the results."""

    exit_code = 6


class ReportError(DocdriftError):
    """Report inputs are inconsistent (e.g. a result references an unknown pair)."""

    exit_code = 7
