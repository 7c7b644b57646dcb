"""Size-conditioned critical Bienayme trees: samplers, scaling sequences,
bijections, and an experiment harness."""

from . import construct, dist, foata, paths, report, sample, scaling, tree
from .dist import OffspringDist, load_spec
from .rng import stream

__version__ = "0.1.0"

__all__ = ["construct", "dist", "foata", "paths", "report", "sample",
           "scaling", "tree", "OffspringDist", "load_spec", "stream",
           "__version__"]
