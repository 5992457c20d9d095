# Analyze action
from .Analyze import Analyze
