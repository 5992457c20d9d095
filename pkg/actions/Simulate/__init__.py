# Simulate action
from .Simulate import Simulate
