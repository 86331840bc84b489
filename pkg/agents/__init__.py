"""
Agents
Bayesian agent model; the auditor lives in agents.ic_auditor
"""

from .bayesian_agent import (InfoSet, PolicyProfile, MonteCarloBudget, PosteriorEstimate,
                             InsufficientSupport, posterior_values, best_response, exact_posterior)

__all__ = [
    'InfoSet',
    'PolicyProfile',
    'MonteCarloBudget',
    'PosteriorEstimate',
    'InsufficientSupport',
    'posterior_values',
    'best_response',
    'exact_posterior'
]
