"""Virtual radio nodes: probes, SNR/SINR estimation and a BPSK packet modem."""

from .estimate import (
    SNR_CEILING_DB,
    PnProbe,
    ProbeFit,
    ProbeNotFoundError,
    estimate_sinr,
    estimate_snr,
    fit_probe,
    locate,
)
from .modem import MAX_PAYLOAD, PREAMBLE, ModemRx, RxFrame, frame_len, modem_rx, modem_tx
from .nodes import (
    ROLES,
    ModemEndpointNode,
    NodeHarness,
    ProbeRxNode,
    ProbeTxNode,
    SilentNode,
    TickStarvationError,
    run_node,
)
