"""Counter-based random streams.

Every random decision is addressed by ``(master_seed, stream_tag, position)``
so that results do not depend on how work is split into blocks or threads.
"""

import numpy as np

# stream tags
X_BITS = 1
XSQ_BITS = 2
Y_BITS = 3
X_BITS_SECOND = 4
SKETCH = 10
SCENARIO = 20
REPLICATION = 30

_OUTPUTS_PER_COUNTER = 4  # Philox4x64 yields four 64-bit words per counter step


def _key(master_seed, *keys):
    if master_seed < 0 or any(k < 0 for k in keys):
        raise ValueError("seeds and stream keys must be non-negative")
    ss = np.random.SeedSequence([int(master_seed), *(int(k) for k in keys)])
    return ss.generate_state(2, np.uint64)


def derive_seed(master_seed, *keys):
    """Deterministic 63-bit child seed for a substream."""
    ss = np.random.SeedSequence([int(master_seed), *(int(k) for k in keys)])
    return int(ss.generate_state(1, np.uint64)[0] >> np.uint64(1))


def generator(master_seed, *keys):
    """A fresh ``numpy.random.Generator`` for the substream ``keys``."""
    return np.random.Generator(np.random.Philox(key=_key(master_seed, *keys)))


def uniform_block(master_seed, tag, start, count, width=1):
    """Uniforms on [0, 1) for rows ``start .. start+count-1`` of a stream.

    Row ``i`` column ``j`` is always the draw at stream position ``i*width + j``,
    whatever ``start`` and ``count`` are.
    """
    pos = start * width
    counter = np.zeros(4, dtype=np.uint64)
    counter[0] = pos // _OUTPUTS_PER_COUNTER
    skip = pos % _OUTPUTS_PER_COUNTER
    g = np.random.Generator(np.random.Philox(key=_key(master_seed, tag), counter=counter))
    out = g.random(skip + count * width)[skip:]
    return out.reshape(count, width)
