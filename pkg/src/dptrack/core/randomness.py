"""Seeded noise streams, the Laplace mechanism and the stepsize schedules."""

import numpy as np

from dptrack.models.run_config import Schedule

# Shifts Generator.random() from [0, 1) onto an interval symmetric about 1/2
HALF_ULP = 2.0**-54

PHILOX_WORDS = 4


def gamma_at(s: Schedule, k):
    """gamma_k = gamma/(m+k)^p. Accepts a scalar or an array of iteration indices."""
    return s.gamma / np.power(s.m + np.asarray(k, dtype=float), s.p)


def beta_at(s: Schedule, k):
    """beta_k = 1/(m+k)^q."""
    return 1.0 / np.power(s.m + np.asarray(k, dtype=float), s.q)


def laplace_transform(u, b: float):
    """Inverse CDF of Lap(b) evaluated at u in (-1/2, 1/2)."""
    u = np.asarray(u, dtype=float)
    return -b * np.sign(u) * np.log1p(-2.0 * np.abs(u))


def laplace_sample(b: float, stream: np.random.Generator, size=None):
    """Lap(b) draws by inverse-CDF sampling.

    The same generator state always yields the same samples.
    """
    u = stream.random(size) + HALF_ULP - 0.5
    out = laplace_transform(u, b)
    return float(out) if size is None else out


class NoiseStream:
    """Counter-based unit-Laplace noise for one run.

    Iteration k of run ``run_id`` always reads the same Philox counter block,
    so any iteration can be regenerated without replaying earlier ones. Each
    block holds n*r entries for eta followed by n*r entries for xi, laid out
    agent-major and then by coordinate.
    """

    def __init__(self, seed: int, run_id: int, n: int, r: int):
        self.seed = seed
        self.run_id = run_id
        self.n = n
        self.r = r
        self._key = np.random.SeedSequence([seed, run_id]).generate_state(2, dtype=np.uint64)
        self._count = 2 * n * r
        self._blocks = -(-self._count // PHILOX_WORDS)

    def _generator(self, k: int) -> np.random.Generator:
        counter = np.array([k * self._blocks, 0, 0, 0], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=self._key, counter=counter))

    def _unit(self, uniforms: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        samples = laplace_transform(uniforms[..., : self._count] + HALF_ULP - 0.5, 1.0)
        nr = self.n * self.r
        shape = samples.shape[:-1] + (self.n, self.r)
        return samples[..., :nr].reshape(shape), samples[..., nr:].reshape(shape)

    def draw(self, k: int) -> tuple[np.ndarray, np.ndarray]:
        """Unit-scale (eta_k, xi_k), each n x r."""
        uniforms = self._generator(k).random(self._blocks * PHILOX_WORDS)
        return self._unit(uniforms)

    def draw_batch(self, k0: int, count: int) -> tuple[np.ndarray, np.ndarray]:
        """draw(k) for k = k0 .. k0+count-1, stacked along a leading axis."""
        uniforms = self._generator(k0).random((count, self._blocks * PHILOX_WORDS))
        return self._unit(uniforms)


def make_stream(seed: int, run_id: int, n: int, r: int) -> NoiseStream:
    return NoiseStream(seed, run_id, n, r)
