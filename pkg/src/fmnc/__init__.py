"""Translation-invariant metrics on Frechet spaces, Hausdorff MNC bounds on
finite samples, and a Darbo-style fixed-point solver."""
from .convexity import hull_sample
from .fixedpoint import OperatorSpec, darbo_solve, estimate_upper_char, sadovskii_check
from .metric import FNormMetric, build_fnorm, fnorm_eval, metric_eval
from .mnc import AlphaBounds, NetCertificate, alpha_bounds, greedy_net, net_transfer_co
from .space import PointCloud, SpaceModel, make_space, seminorm_eval

__all__ = [
    "AlphaBounds", "FNormMetric", "NetCertificate", "OperatorSpec", "PointCloud", "SpaceModel",
    "alpha_bounds", "build_fnorm", "darbo_solve", "estimate_upper_char", "fnorm_eval", "greedy_net",
    "hull_sample", "make_space", "metric_eval", "net_transfer_co", "sadovskii_check", "seminorm_eval",
]
__version__ = "0.1.0"
