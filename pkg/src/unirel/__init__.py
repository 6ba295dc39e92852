"""Unitary commutation relation algebras on truncated Fock space."""
from .errors import *  # noqa: F401,F403
from .relations import RelationMatrix, validate, exchange_tilde, blocks, swap, load_json

__version__ = "0.1.0"
