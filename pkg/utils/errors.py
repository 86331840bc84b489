"""
Simulator Errors
Base exception shared by every package in the simulator
"""


class SimulatorError(Exception):
    """Base class for all domain errors raised by the simulator"""
