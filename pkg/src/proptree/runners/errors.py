from ..core import PropertyError


class ConfigurationError(PropertyError):
    """A runner was asked to do something the property's annotations cannot support."""


class ShrinkError(PropertyError):
    pass


class CampaignError(PropertyError):
    """A worker crashed; ``report`` holds what the other workers accumulated."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report
