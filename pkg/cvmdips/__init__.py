__version__ = "0.1.0"

from cvmdips.data import BipartiteCovariance, LinkParams, ProtocolConfig, RateReport, RunConfig, SourceParams
from cvmdips.keyrate import plob_bound, secret_key_rate
