"""Seeded random streams.

Every random draw in the package comes from :func:`stream`.  The generator is
numpy's PCG64 (64-bit state increments, 128-bit state) seeded through
``SeedSequence(seed, spawn_key=(index,))``, so independent sub-runs of one
experiment use disjoint, reproducible streams: stream ``i`` of seed ``s`` is
the same sequence on every platform numpy supports.
"""
import numpy as np


def stream(seed, index=0):
    """Return the generator for stream ``index`` of ``seed``."""
    if seed is None:
        raise ValueError("an explicit integer seed is required")
    seq = np.random.SeedSequence(int(seed) & 0xFFFFFFFFFFFFFFFF, spawn_key=(int(index),))
    return np.random.Generator(np.random.PCG64(seq))


def unit_vectors(rng, n, d):
    """Draw ``n`` Euclidean unit vectors in R^d, uniform on the sphere."""
    z = rng.standard_normal((n, d))
    norms = np.linalg.norm(z, axis=1, keepdims=True)
    # a zero Gaussian draw has probability zero; guard anyway
    norms[norms == 0] = 1.0
    return z / norms
