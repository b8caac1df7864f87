"""Decentralized controller search for Dec-POMDPs."""

import json as _json

from ._mcjesp import Error, Model
from . import _mcjesp

__all__ = ["Error", "Model", "load", "solve", "evaluate_exact", "evaluate_mc", "fsc_to_dot"]
__version__ = "0.1.0"


def load(path):
    return Model.load(str(path))


def _policy_text(policy):
    return policy if isinstance(policy, str) else _json.dumps(policy)


def solve(model, **options):
    """Run restarts of the local search; returns a dict with summary statistics
    and, per restart, the final joint policy and iteration log."""
    return _json.loads(_mcjesp.solve(model, **options))


def evaluate_exact(model, policy, tol=1e-6):
    return _mcjesp.evaluate_exact(model, _policy_text(policy), tol)


def evaluate_mc(model, policy, sims=100000, cutoff=1e-4, seed=1, workers=0):
    return _json.loads(_mcjesp.evaluate_mc(model, _policy_text(policy), sims, cutoff, seed, workers))


def fsc_to_dot(model, policy, agent):
    return _mcjesp.fsc_to_dot(model, _policy_text(policy), agent)
