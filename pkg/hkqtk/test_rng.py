"""Tests for the rng submodule."""

import numpy as np
import pytest

from .rng import *


class TestSubstream:
	def test_deterministic(self):
		assert np.array_equal(substream(7).random(10), substream(7).random(10))

	def test_streams_differ(self):
		draws = [substream(7, index).random(4) for index in (NOISE_STREAM, INIT_STREAM, SAMPLING_STREAM)]
		assert not np.array_equal(draws[0], draws[1])
		assert not np.array_equal(draws[1], draws[2])
		assert not np.array_equal(substream(7).random(4), substream(8).random(4))

	def test_low_bits_only(self):
		assert np.array_equal(substream(2**64 + 5).random(3), substream(5).random(3))

	def test_invalid(self):
		with pytest.raises(ValueError):
			substream(-1)
		with pytest.raises(ValueError):
			substream(1, -2)


class TestParticleStream:
	def test_distinct_from_substreams(self):
		assert not np.array_equal(particle_stream(7, 0).random(4), substream(7).random(4))
		assert not np.array_equal(particle_stream(7, 0).random(4), particle_stream(7, 1).random(4))
		assert not np.array_equal(particle_stream(7, 0).random(4), particle_stream(7, 0, INIT_STREAM).random(4))

	def test_invalid(self):
		with pytest.raises(ValueError):
			particle_stream(-1, 0)
		with pytest.raises(ValueError):
			particle_stream(1, -1)


class TestParticleNoise:
	def test_rows_are_particle_streams(self):
		noise = ParticleNoise(3, 4)
		draws = np.stack([noise.standard_normal((4, 2)) for _ in range(3)], axis=1)
		for i in range(4):
			np.testing.assert_array_equal(draws[i], particle_stream(3, i).standard_normal((3, 2)))

	@pytest.mark.parametrize("block", [1, 2, 256])
	def test_independent_of_particle_count(self, block: int):
		small, large = ParticleNoise(5, 5, block=block), ParticleNoise(5, 10, block=block)
		for _ in range(5):
			np.testing.assert_array_equal(small.standard_normal((5, 3)), large.standard_normal((10, 3))[:5])

	def test_independent_of_evaluation_order(self):
		forward = ParticleNoise(9, 6).standard_normal((6, 2))
		# draw the particle streams in reverse order
		backward = [particle_stream(9, i).standard_normal((256, 2))[0] for i in reversed(range(6))]
		np.testing.assert_array_equal(forward, backward[::-1])

	def test_deterministic(self):
		np.testing.assert_array_equal(ParticleNoise(1, 3).standard_normal((3, 2)), ParticleNoise(1, 3).standard_normal((3, 2)))

	def test_shape_mismatch(self):
		with pytest.raises(ValueError):
			ParticleNoise(1, 3).standard_normal((4, 2))
		with pytest.raises(ValueError):
			ParticleNoise(1, 3, block=0)
