from .slices import *
from .pixmap import *
