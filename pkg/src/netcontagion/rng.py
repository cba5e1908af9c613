"""Seedable counter-based random streams.

All randomness in the package comes from Philox4x64-10 (numpy's
``Philox`` bit generator), a counter-based generator.  A stream is fully
determined by three integers:

* ``seed``: the user's 64-bit seed, stored in key word 0;
* ``purpose``: a small tag separating unrelated uses of the same seed
  (permutation replicates, cohort generation, ...), stored in key word 1;
* ``index``: the replicate number, stored in the most significant counter
  word, so streams for different replicates never overlap in practice.

Because replicate ``r`` always reads stream ``(seed, purpose, r)``, Monte
Carlo output does not depend on how replicates are split across workers.
"""

import os
import secrets

import numpy as np

from .errors import ConfigurationError

MAX_SEED = 2**64 - 1

# purpose tags
PERMUTATION = 1
WITHIN_CATEGORY = 2
COHORT = 3
CONTAGION = 4
AUTOCORR_NOISE = 5
ERGM_SIM = 6

THREADS_ENV = "NETCONTAGION_THREADS"


def check_seed(seed):
    if isinstance(seed, (bool, np.bool_)) or not isinstance(seed, (int, np.integer)):
        raise ConfigurationError(f"seed must be an integer, got {seed!r}")
    seed = int(seed)
    if not 0 <= seed <= MAX_SEED:
        raise ConfigurationError(f"seed must lie in [0, 2**64), got {seed}")
    return seed


def fresh_seed():
    """Draw a seed from the OS entropy pool (recorded by callers)."""
    return secrets.randbits(64)


def stream(seed, purpose, index=0):
    """Return a ``numpy.random.Generator`` for stream ``(seed, purpose, index)``."""
    seed = check_seed(seed)
    bitgen = np.random.Philox(key=np.array([seed, int(purpose)], dtype=np.uint64),
                             counter=np.array([0, 0, 0, int(index)], dtype=np.uint64))
    return np.random.Generator(bitgen)


def default_threads():
    """Worker count from ``NETCONTAGION_THREADS`` (default 1)."""
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigurationError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if n < 1:
        raise ConfigurationError(f"{THREADS_ENV} must be >= 1, got {n}")
    return n
