"""Projected quasi-Newton detection for one-bit massive MIMO-OFDM uplinks."""

from .channel import (
    ChannelRealization,
    PowerDelayProfile,
    apply_link,
    draw_channel,
    exponential_pdp,
    lds_profile,
    load_pdp,
    sds_profile,
)
from .config import SystemConfig, load_config
from .detectors import (
    DetectorEstimate,
    DetectorParams,
    detect,
    ml_exhaustive,
    mrc_init,
    newton_exact_detect,
    obox_detect,
    pqnd_detect,
    zf_detect,
)
from .frontend import QuantizedFrame, ThresholdConfig, quantize, threshold_snr_db, threshold_variance
from .harness import run_ber, run_convergence, run_sweep
from .numerics import Constellation, make_constellation, psi, varphi

__version__ = "0.1.0"
