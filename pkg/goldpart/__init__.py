from .__version__ import __version__
from .api import fit_goldbach_model, goldbach_comet, gpread
