from .bq import *
