"""Link-level simulation of semantic label-map transmission.

Label maps are packetised, polar encoded, sent as BPSK over AWGN, decoded by
successive cancellation, concealed with a median filter and checked against
the label set the receiver's generator was trained on.
"""

from .codec import RleStream, compress, decompress
from .concealment import FilterConfig, median_filter
from .framing import FramePlan, packetize, reassemble
from .harness import ScenarioConfig, run_fer_bench, run_scenario, transmit_image
from .metrics import INFINITE, ber, compression_ratio, fer, psnr
from .modem import ChannelParams, demap, modulate, transmit
from .pgm import read_pgm, write_pgm
from .polar import PolarCodeSpec, construct, encode, sc_decode, sc_decode_batch
from .semantics import LabelMap, TrainedLabelSet, edge_distortion, edge_map, label_histogram, validate

__version__ = "0.1.0"

__all__ = [
    "ChannelParams",
    "FilterConfig",
    "FramePlan",
    "INFINITE",
    "LabelMap",
    "PolarCodeSpec",
    "RleStream",
    "ScenarioConfig",
    "TrainedLabelSet",
    "ber",
    "compress",
    "compression_ratio",
    "construct",
    "decompress",
    "demap",
    "edge_distortion",
    "edge_map",
    "encode",
    "fer",
    "label_histogram",
    "median_filter",
    "modulate",
    "packetize",
    "psnr",
    "read_pgm",
    "reassemble",
    "run_fer_bench",
    "run_scenario",
    "sc_decode",
    "sc_decode_batch",
    "transmit",
    "transmit_image",
    "validate",
    "write_pgm",
]
