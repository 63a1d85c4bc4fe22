class ScenarioError(ValueError):
    """Base for every document error. ``location`` is a line number or a field path."""

    kind = "invalid"

    def __init__(self, message, location=None, rule=None):
        self.location = location
        self.rule = rule or message
        where = f"{location}: " if location not in (None, "") else ""
        super().__init__(f"{self.kind}: {where}{message}")


class FormatSyntaxError(ScenarioError):
    kind = "syntax error"


class UnknownFieldError(ScenarioError):
    kind = "unknown field"


class MissingFieldError(ScenarioError):
    kind = "missing field"


class InvariantError(ScenarioError):
    kind = "invariant violation"


class UnknownScenarioError(LookupError):
    pass
