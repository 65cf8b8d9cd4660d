"""Exception hierarchy shared by every modflow module."""


class ModflowError(Exception):
    """Base class for all toolkit errors."""


class InvalidGeometry(ModflowError):
    pass


class TopologyViolation(ModflowError):
    pass


class InvalidRegion(ModflowError):
    pass


class InvalidOperator(ModflowError):
    pass


class InvalidParameter(ModflowError):
    pass


class NoSupport(ModflowError):
    """Requested charge sector has no basis states."""


class ResourceLimit(ModflowError):
    pass


class PreconditionViolation(ModflowError):
    pass


class ModelGapless(ModflowError):
    pass


class ConfigError(ModflowError):
    pass
