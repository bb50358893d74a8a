"""Joint zooming quantization and self-triggered sampling for discrete-time LTI loops."""

from .certify import (CertificateError, DesignReport, StabilityCertificate, check_design,
                      choose_gamma, compute_certificate, contraction_norm, phi)
from .codec import EncoderConfig, decode_block, encode_block, quantize_state
from .simkit import PlantModel, RunMetrics, SimTrace, simulate
from .trigger import TriggerConfig, TriggerDecision, ZenoError, g_eval, next_sample

__version__ = "0.1.0"
