import factory

from certdel.utils.correlated import SourceSpec
from certdel.utils.dem import Dem, OTP
from certdel.utils.demcd import DemCd, DEFAULT_MODE
from certdel.utils.games import GameConfig
from certdel.utils.ikem import Ikem, IkemParams
from certdel.utils.phecd import PheCd


class SourceSpecFactory(factory.Factory):
    class Meta:
        model = SourceSpec

    n = 8
    p_b = 0.0
    p_e = 0.25


class IkemParamsFactory(factory.Factory):
    """默认即 tiny 预设的 iKEM 参数"""

    class Meta:
        model = IkemParams

    spec = factory.SubFactory(SourceSpecFactory)
    key_len = 2
    check_len = 1
    block_len = 0


class IkemFactory(factory.Factory):
    class Meta:
        model = Ikem

    params = factory.SubFactory(IkemParamsFactory)


class DemFactory(factory.Factory):
    class Meta:
        model = Dem

    variant = OTP


class DemCdFactory(factory.Factory):
    class Meta:
        model = DemCd

    dem = factory.SubFactory(DemFactory)
    lam = 3


class PheCdFactory(factory.Factory):
    class Meta:
        model = PheCd

    ikem = factory.SubFactory(IkemFactory)
    demcd = factory.SubFactory(DemCdFactory, lam=1)
    per_bit_capsule = False


class GameConfigFactory(factory.Factory):
    class Meta:
        model = GameConfig

    trials = 500
    q_e = 0
    seed = factory.Sequence(lambda i: 1000 + i)
    vrfy_mode = DEFAULT_MODE
    workers = 1
