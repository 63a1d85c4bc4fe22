"""Raw IQ dumps: little-endian interleaved float64 re/im, one file per node."""

from pathlib import Path

import numpy as np

IQ_DTYPE = np.dtype("<c16")


def iq_path(directory, node_id):
    return Path(directory) / f"node{node_id}.iq"


def append_iq(path, samples):
    with open(path, "ab") as fh:
        np.asarray(samples, dtype=IQ_DTYPE).tofile(fh)


def read_iq(path):
    return np.fromfile(path, dtype=IQ_DTYPE).astype(np.complex128)
