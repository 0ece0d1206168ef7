"""Offline adapter: pre-trained network activations to DDT1 descriptor files."""

from .ddt1 import read_ddt1, write_ddt1
from .extract import ExtractionConfig, UndecodableImage, extract
from .models import ModelLoadFailure, TapModel, load_model

__version__ = "0.1.0"

__all__ = [
    "ExtractionConfig",
    "ModelLoadFailure",
    "TapModel",
    "UndecodableImage",
    "extract",
    "load_model",
    "read_ddt1",
    "write_ddt1",
]
