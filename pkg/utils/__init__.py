from .errors import SimulatorError

__all__ = ['SimulatorError']
