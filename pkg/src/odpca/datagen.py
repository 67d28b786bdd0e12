"""Synthetic spiked-covariance models and counter-addressable sampling.

Sampling is driven by SeededStream, a Philox-backed stream in which draw i is
a pure function of (seed, i). Batches for different (node, round) cells live
on disjoint counter ranges, so they can be produced independently, in
parallel, or re-derived by slicing a pooled sample, with identical bits.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.random import Generator, Philox
from scipy.special import ndtri

from .linalg import check_basis
from .subspace import SpectrumStats, spectrum_stats

# random() yields multiples of 2^-53 in [0, 1); the shift centers them in (0, 1)
# so the inverse normal CDF never sees an endpoint.
_OPEN_UNIT_SHIFT = 2.0**-54

_PHILOX_WORDS_PER_BLOCK = 4


@dataclass
class SeededStream:
    """Counter-mode random stream: draw i is a pure function of (seed, i).

    ``counter`` indexes individual draws (one 64-bit word each). Philox
    advances in 4-word blocks, so positioning uses advance(counter // 4) plus
    a short discard.
    """

    seed: int
    counter: int = 0

    def _uniform(self, count: int) -> np.ndarray:
        bit_gen = Philox(key=self.seed % (1 << 128))
        block, offset = divmod(self.counter, _PHILOX_WORDS_PER_BLOCK)
        if block:
            bit_gen.advance(block)
        u = Generator(bit_gen).random(offset + count)[offset:]
        self.counter += count
        return u

    def random(self, shape) -> np.ndarray:
        """Uniform [0, 1) draws; advances the counter by the number of draws."""
        shape = (shape,) if isinstance(shape, int) else tuple(shape)
        count = int(np.prod(shape, dtype=np.int64)) if shape else 1
        return self._uniform(count).reshape(shape)

    def standard_normal(self, shape) -> np.ndarray:
        """N(0, 1) draws via the inverse normal CDF: exactly one draw per value."""
        return ndtri(self.random(shape) + _OPEN_UNIT_SHIFT)

    def rademacher(self, shape) -> np.ndarray:
        """Uniform +-1 draws: exactly one draw per value."""
        return np.where(self.random(shape) < 0.5, -1.0, 1.0)

    def at(self, counter: int) -> "SeededStream":
        """A stream over the same sequence, positioned at an absolute counter."""
        return SeededStream(self.seed, counter)


@dataclass(frozen=True)
class SpikedModel:
    """Population covariance V diag(eigenvalues) V' with known leading eigenspace.

    eigenvalues are descending and positive with a positive gap at ``rank``;
    the first ``rank`` columns of full_basis are the ground-truth eigenspace.
    """

    ambient_dim: int
    rank: int
    eigenvalues: np.ndarray  # (d,)
    full_basis: np.ndarray  # (d, d) orthonormal

    @property
    def ground_truth(self) -> np.ndarray:
        return self.full_basis[:, : self.rank]

    def covariance(self) -> np.ndarray:
        v = self.full_basis
        cov = (v * self.eigenvalues) @ v.T
        return (cov + cov.T) / 2.0

    def stats(self) -> SpectrumStats:
        return spectrum_stats(self.eigenvalues, self.rank)


def default_spikes(k: int) -> np.ndarray:
    """Desk-scale spike ladder 2k, 2k-1, ..., k+1 over a unit bulk.

    For k = 5 this is (10, 9, 8, 7, 6): a strong but not degenerate gap.
    """
    return np.arange(2 * k, k, -1, dtype=float)


def make_spiked_model(d: int, k: int, spike_values, bulk_value: float, seed: int) -> SpikedModel:
    """Build a spiked model with a Haar-random orthonormal basis.

    The basis is the QR factor of a seeded standard Gaussian d x d matrix with
    the R diagonal sign-fixed, which makes it Haar-distributed and fully
    deterministic in the seed.
    """
    spikes = np.asarray(spike_values, dtype=float)
    if spikes.ndim != 1 or spikes.size != k:
        raise ValueError(f"expected {k} spike values, got shape {spikes.shape}")
    if k < 1 or k >= d:
        raise ValueError(f"rank must satisfy 1 <= k < d, got k={k}, d={d}")
    if np.any(np.diff(spikes) > 0):
        raise ValueError("spike values must be non-increasing")
    if not 0.0 < bulk_value < float(spikes.min()):
        raise ValueError(
            f"need min(spikes) > bulk > 0, got min(spikes)={spikes.min()}, bulk={bulk_value}"
        )
    eigenvalues = np.concatenate([spikes, np.full(d - k, float(bulk_value))])
    g = SeededStream(seed).standard_normal((d, d))
    q, r = np.linalg.qr(g)
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    basis = check_basis(q * signs, "model basis")
    return SpikedModel(d, k, eigenvalues, basis)


def sample_gaussian(model: SpikedModel, n: int, stream: SeededStream) -> np.ndarray:
    """n i.i.d. rows of N(0, Sigma): x = V Lambda^{1/2} z with z ~ N(0, I_d).

    Advances the stream counter by exactly n * d draws.
    """
    if n < 1:
        raise ValueError(f"sample count must be >= 1, got {n}")
    z = stream.standard_normal((n, model.ambient_dim))
    return (z * np.sqrt(model.eigenvalues)) @ model.full_basis.T


def sample_heavy_shuffled(model: SpikedModel, n: int, stream: SeededStream) -> np.ndarray:
    """Rademacher-rescaled variant: x = V Lambda^{1/2} (eps * |g|).

    eps is an independent sign field, so coordinates stay symmetric and the
    population covariance is still Sigma. Consumes 2 n d draws: one normal
    block followed by one sign block.
    """
    if n < 1:
        raise ValueError(f"sample count must be >= 1, got {n}")
    g = stream.standard_normal((n, model.ambient_dim))
    eps = stream.rademacher((n, model.ambient_dim))
    return ((eps * np.abs(g)) * np.sqrt(model.eigenvalues)) @ model.full_basis.T
