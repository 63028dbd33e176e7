"""Counter-based, seedable random streams."""

import numpy as np


# substream indices (one jump of the Philox counter per index)
NOISE_STREAM = 0
INIT_STREAM = 1
SAMPLING_STREAM = 2

SEED_MASK = 2**64 - 1


def substream(seed: int, index: int = NOISE_STREAM) -> np.random.Generator:
	"""Return an independent random stream derived from a 64-bit seed.

	The stream is a Philox counter-based generator keyed by `seed` and advanced by `index` jumps
	of 2^128 draws, so streams with distinct indices (or distinct seeds) never overlap.

	Args:
		seed: A non-negative integer; only the low 64 bits are used.
		index: Which substream of the seed to return.
	"""

	if seed < 0:
		raise ValueError(f"seed must be non-negative, got {seed}")
	if index < 0:
		raise ValueError(f"substream index must be non-negative, got {index}")

	bitgen = np.random.Philox(key=seed & SEED_MASK)
	if index > 0:
		bitgen = bitgen.jumped(index)
	return np.random.Generator(bitgen)


def particle_stream(seed: int, particle: int, index: int = NOISE_STREAM) -> np.random.Generator:
	"""Return the random stream owned by one particle.

	The Philox key carries the seed in its low word and `particle + 1` in its high word, so particle streams
	never coincide with each other or with `substream(seed, index)`.
	"""

	if seed < 0:
		raise ValueError(f"seed must be non-negative, got {seed}")
	if not 0 <= particle < SEED_MASK:
		raise ValueError(f"particle index out of range: {particle}")
	if index < 0:
		raise ValueError(f"substream index must be non-negative, got {index}")

	bitgen = np.random.Philox(key=(seed & SEED_MASK) | ((particle + 1) << 64))
	if index > 0:
		bitgen = bitgen.jumped(index)
	return np.random.Generator(bitgen)


class ParticleNoise:
	"""Gaussian noise for N particles, where row i of every draw comes from particle i's own stream.

	Row i depends only on (seed, i, index) and on the draws before it, never on N or on the order in
	which particles are processed. Draws are buffered `block` at a time per particle; requesting a
	different trailing shape discards what remains of the buffer.
	"""

	def __init__(self, seed: int, n: int, index: int = NOISE_STREAM, block: int = 256):
		if block < 1:
			raise ValueError(f"block must be positive, got {block}")
		self.streams = [particle_stream(seed, i, index) for i in range(n)]
		self.block = block
		self._buffer: np.ndarray | None = None
		self._cursor = 0

	@property
	def n(self) -> int:
		return len(self.streams)

	def standard_normal(self, size: tuple[int, ...]) -> np.ndarray:
		if len(size) < 1 or size[0] != self.n:
			raise ValueError(f"expected a leading dimension of {self.n}, got shape {size}")
		tail = tuple(size[1:])
		if self._buffer is None or self._buffer.shape[2:] != tail or self._cursor == self.block:
			self._buffer = np.stack([stream.standard_normal((self.block, *tail)) for stream in self.streams])
			self._cursor = 0
		out = self._buffer[:, self._cursor].copy()
		self._cursor += 1
		return out


# anything the Langevin steps can draw their noise from
NormalSource = np.random.Generator | ParticleNoise
