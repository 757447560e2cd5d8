"""Seeded, named random substreams.

Every random concern (waypoint placement, landmark placement, each mover's
targets, control noise, measurement noise) draws from its own PCG64 stream,
derived from the run seed and a fixed stream tag via ``SeedSequence`` spawn
keys.  Adding or removing movers therefore never perturbs the draws of any
other concern, which keeps experiment sweeps comparable cell to cell.
"""

from __future__ import annotations

import numpy as np

# Stream tags. Movers use (STREAM_MOVER, index) so each gets its own stream.
STREAM_WAYPOINTS = 0
STREAM_LANDMARKS = 1
STREAM_CONTROL = 2
STREAM_MEASUREMENT = 3
STREAM_MOVER = 4


def substream(seed: int, *tag: int) -> np.random.Generator:
    """Independent generator for one named concern of one run."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy=seed, spawn_key=tag)))


def derive_trial_seed(base_seed: int, experiment_code: int, param_value: int, trial: int) -> int:
    """Collision-resistant 64-bit seed for one trial of one sweep cell."""
    seq = np.random.SeedSequence(entropy=(base_seed, experiment_code, param_value, trial))
    return int(seq.generate_state(1, dtype=np.uint64)[0])
