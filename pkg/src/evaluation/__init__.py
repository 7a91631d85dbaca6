from .evaluate_seeds import *
from .visualize_results import *
