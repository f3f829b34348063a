"""Counter-based random substreams.

Trials are grouped into fixed blocks of ``BLOCK_SIZE``. Each block gets
its own Philox generator keyed by ``(seed, stream, block)``, so the
numbers drawn for trial ``n`` never depend on how a run is split into
batches or across worker processes.
"""

from __future__ import annotations

import numpy as np

BLOCK_SIZE = 1 << 16

# stream tags, one per independent use of randomness
ASSIGNMENT = 0
OUTCOME = 1


def _check_seed(seed: int) -> int:
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)) or seed < 0:
        raise ValueError(f"seed must be a non-negative integer, got {seed!r}")
    return int(seed)


def block_generator(seed: int, block: int, stream: int = 0) -> np.random.Generator:
    seed = _check_seed(seed)
    ss = np.random.SeedSequence([seed, int(stream), int(block)])
    return np.random.Generator(np.random.Philox(ss))


def block_uniforms(seed: int, block: int, stream: int = 0) -> np.ndarray:
    """All ``BLOCK_SIZE`` uniforms of one block."""
    return block_generator(seed, block, stream).random(BLOCK_SIZE)


def trial_uniforms(seed: int, start: int, count: int, stream: int = 0) -> np.ndarray:
    """Uniforms for trials ``start .. start+count-1`` of a substream."""
    if start < 0 or count < 0:
        raise ValueError("start and count must be non-negative")
    out = np.empty(count)
    pos = 0
    trial = start
    while pos < count:
        block, offset = divmod(trial, BLOCK_SIZE)
        take = min(BLOCK_SIZE - offset, count - pos)
        out[pos:pos + take] = block_uniforms(seed, block, stream)[offset:offset + take]
        pos += take
        trial += take
    return out


def seed_path(seed: int, trial: int) -> str:
    """Human-readable substream id of a trial: ``seed/block/offset``."""
    block, offset = divmod(trial, BLOCK_SIZE)
    return f"{seed}/{block}/{offset}"
