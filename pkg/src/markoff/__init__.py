from .errors import *
from .algebra import *
from .tree import *
from .dynamics import *
