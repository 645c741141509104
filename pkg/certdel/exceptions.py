"""certdel 的异常层级。⊥ 一律用返回值表达（None / False），这里只放真正的错误。"""


class CertDelError(Exception):
    """所有 certdel 错误的基类"""


class LengthMismatchError(CertDelError, ValueError):
    """比特串长度不满足约定"""


class ParameterError(CertDelError, ValueError):
    """参数非法，或超出穷举/预言机允许的规模"""


class KeyLengthError(ParameterError):
    """DEM 密钥比所需长度短"""


class RegisterConsumedError(CertDelError):
    """对已被破坏性测量的量子寄存器再次测量"""


class OracleBudgetExceeded(CertDelError):
    """对手的第 q_e + 1 次预言机查询"""


class OracleForbidden(OracleBudgetExceeded):
    """一次性(OT)游戏里不允许任何预言机查询"""
