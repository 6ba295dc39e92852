"""Tolerance and search settings shared by the library, the CLI and the scripts."""
from dataclasses import asdict, dataclass


@dataclass(frozen=True)
class Tolerances:
    unitary: float = 1e-10
    variety: float = 1e-9
    rank: float = 1e-9  # relative singular-value threshold for kernels
    rank_warn_low: float = 1e-11
    rank_warn_high: float = 1e-7
    eigen_cluster: float = 1e-9
    interior_margin: float = 1e-12
    relation: float = 1e-10
    nest: float = 1e-12
    x_identities: float = 1e-12
    ball_round_trip: float = 1e-10
    automorphism: float = 1e-9
    intertwiner: float = 1e-9
    certificate: float = 1e-8

    def as_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class SearchConfig:
    """Alternating unitary Procrustes search settings."""

    restarts: int = 32
    max_iter: int = 500
    stall: float = 1e-12  # relative decrease below which a restart is abandoned
    success: float = 1e-8
    seed: int = 0
    polish: bool = True  # Gauss-Newton refinement on the unitary manifold after stalling
    init: str = "subspace"  # "subspace": start from the intertwiner subspace; "random": Haar start

    def as_dict(self):
        return asdict(self)


DEFAULT_TOLERANCES = Tolerances()
DEFAULT_SEARCH = SearchConfig()
