from .backbones import EfficientNetEncoder, TinyCnnEncoder, global_average_pool
from .catalog import (
    BACKBONES,
    DECODERS,
    EncoderDecoderNet,
    check_catalog,
    default_input_size,
    parse_model_spec,
)

__all__ = [
    "BACKBONES",
    "DECODERS",
    "EfficientNetEncoder",
    "EncoderDecoderNet",
    "TinyCnnEncoder",
    "check_catalog",
    "default_input_size",
    "global_average_pool",
    "parse_model_spec",
]
