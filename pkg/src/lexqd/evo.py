"""Genomes, mutation, populations and seeded random streams."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidConfig
from .kernels import impl as _k

KNIGHT_MOVES = ((1, 2), (2, 1), (2, -1), (1, -2), (-1, -2), (-2, -1), (-2, 1), (-1, 2))
KNIGHT_GENOME_LENGTH = 63


@dataclass(frozen=True)
class KnightSpec:
    """Knight genomes: 63 move indices into :data:`KNIGHT_MOVES`."""

    per_gene_rate: float = 2 / 63
    length: int = KNIGHT_GENOME_LENGTH

    @property
    def n_genes(self) -> int:
        return self.length


@dataclass(frozen=True)
class MlpSpec:
    """Flat weights of a 5 -> hidden (tanh) -> 2 (linear) network.

    Layout: W1 (hidden x 5, row-major), b1, W2 (2 x hidden, row-major), b2.
    """

    hidden: int = 8
    sigma: float = 0.1
    sigma_init: float | None = None
    n_inputs: int = 5
    n_outputs: int = 2

    @property
    def n_genes(self) -> int:
        return (self.n_inputs + 1) * self.hidden + (self.hidden + 1) * self.n_outputs

    def init_scales(self) -> np.ndarray:
        """Per-weight init std; defaults to 1/sqrt(fan_in) of the owning layer."""
        if self.sigma_init is not None:
            return np.full(self.n_genes, float(self.sigma_init))
        n1 = (self.n_inputs + 1) * self.hidden
        scales = np.empty(self.n_genes)
        scales[:n1] = 1.0 / math.sqrt(self.n_inputs)
        scales[n1:] = 1.0 / math.sqrt(self.hidden)
        return scales


@dataclass
class Population:
    members: np.ndarray
    generation: int = 0

    def __len__(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class RngStream:
    """A reproducible random stream keyed by ``(master_seed, stream_id)``.

    ``stream_id`` is an int or a tuple of ints (e.g. replicate index plus a
    purpose tag). Each call to :meth:`generator` restarts the stream.
    """

    master_seed: int
    stream_id: int | tuple[int, ...] = 0
    _key: tuple[int, ...] = field(init=False, repr=False)

    def __post_init__(self):
        sid = self.stream_id if isinstance(self.stream_id, tuple) else (self.stream_id,)
        object.__setattr__(self, "_key", tuple(int(s) for s in sid))

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(int(self.master_seed) & (2**64 - 1), spawn_key=self._key)
        return np.random.Generator(np.random.PCG64(seq))

    def child(self, tag: int) -> "RngStream":
        return RngStream(self.master_seed, self._key + (int(tag),))


def as_generator(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError(f"expected RngStream or numpy Generator, got {type(rng).__name__}")


def init_population(domain_spec, p: int, rng) -> Population:
    if p < 1:
        raise InvalidConfig(f"population size must be >= 1, got {p}")
    gen = as_generator(rng)
    if isinstance(domain_spec, KnightSpec):
        members = gen.integers(0, 8, size=(p, domain_spec.length), dtype=np.int8)
    elif isinstance(domain_spec, MlpSpec):
        members = gen.standard_normal((p, domain_spec.n_genes)) * domain_spec.init_scales()
    else:
        raise InvalidConfig(f"unknown genome spec {domain_spec!r}")
    return Population(members, 0)


def mutate_knight(g: np.ndarray, per_gene_rate: float, rng) -> np.ndarray:
    """Resample each gene uniformly from [0, 7] with ``per_gene_rate``.

    Works on one genome or a (p, 63) batch; the input is never modified.
    """
    if not 0.0 <= per_gene_rate <= 1.0:
        raise InvalidConfig(f"per_gene_rate must be in [0, 1], got {per_gene_rate}")
    gen = as_generator(rng)
    g = np.asarray(g)
    hit = gen.random(g.shape) < per_gene_rate
    fresh = gen.integers(0, 8, size=g.shape, dtype=g.dtype)
    return np.where(hit, fresh, g)


def mutate_mlp(g: np.ndarray, sigma: float, rng) -> np.ndarray:
    if sigma < 0:
        raise InvalidConfig(f"sigma must be >= 0, got {sigma}")
    gen = as_generator(rng)
    g = np.asarray(g, dtype=np.float64)
    return g + sigma * gen.standard_normal(g.shape)


def mlp_forward(g: np.ndarray, inputs, hidden: int | None = None) -> np.ndarray:
    """Raw (unclipped) two-vector output of the policy network."""
    g = np.ascontiguousarray(g, dtype=np.float64)
    inputs = np.ascontiguousarray(inputs, dtype=np.float64)
    if hidden is None:
        # n = 6H + 2(H + 1)
        hidden = (g.shape[0] - 2) // 8
    out = np.empty(2)
    _k.mlp_forward(g, hidden, inputs, out)
    return out
