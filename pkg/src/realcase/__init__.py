from .real_characters import *
