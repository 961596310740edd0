class SkipRecord(Exception):
    """
    The work unit cannot produce a record; counted under `reason`
    """

    def __init__(self, reason: str, message: str = ""):
        self.reason = reason
        super().__init__(message or reason)


class NotQueryableError(ValueError):
    pass
