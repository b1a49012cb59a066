"""
InImNet 錯誤類型

所有錯誤都繼承自 InImNetError (本身是 ValueError)，CLI 依類型決定 exit code。
"""


class InImNetError(ValueError):
    """所有 InImNet 錯誤的基底類別"""


class NonMonotoneGrid(InImNetError):
    pass


class TooFewPoints(InImNetError):
    pass


class NonFiniteEntry(InImNetError):
    pass


class NonFinite(InImNetError):
    """數值積分過程中出現 NaN / Inf"""


class LengthMismatch(InImNetError):
    pass


class ParamLengthMismatch(InImNetError):
    pass


class SchemeUnavailable(InImNetError):
    """所選的 Jacobian scheme 或模型偏導數無法支援此操作"""


class AssumptionViolated(InImNetError):
    pass


class ObservationOffGrid(InImNetError):
    pass


class DivergedTraining(InImNetError):
    pass


class SharingRequired(InImNetError):
    pass


class UnknownSuite(InImNetError):
    pass


class UnknownExperiment(InImNetError):
    pass


class ConfigParseError(InImNetError):
    pass
