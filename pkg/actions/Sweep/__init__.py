# Sweep action
from .Sweep import Sweep
