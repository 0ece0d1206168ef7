"""Model registry: networks with two convolutional tap points.

Each entry yields a TapModel whose forward pass returns the rectified
activations of the final convolutional layer ("last") and of the one before
it ("prev"), both from the same pass.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch
from torch import nn


class ModelLoadFailure(Exception):
    pass


@dataclass
class TapModel:
    name: str
    mean: tuple
    std: tuple
    _prev_stack: nn.Module
    _last_stack: nn.Module

    def preprocess(self, rgb: np.ndarray) -> torch.Tensor:
        """HWC uint8 RGB -> normalized 1CHW float32."""
        x = torch.from_numpy(rgb.astype(np.float32) / 255.0).permute(2, 0, 1)
        mean = torch.tensor(self.mean).view(3, 1, 1)
        std = torch.tensor(self.std).view(3, 1, 1)
        return ((x - mean) / std).unsqueeze(0)

    @torch.no_grad()
    def taps(self, batch: torch.Tensor):
        """One forward pass; returns (last, prev) as (h, w, c) float32."""
        prev = self._prev_stack(batch)
        last = self._last_stack(prev)
        to_hwc = lambda t: t.squeeze(0).permute(1, 2, 0).contiguous().numpy()
        return to_hwc(last), to_hwc(prev)


def _vgg19(weights) -> TapModel:
    from torchvision.models import vgg19

    try:
        if weights is None:
            from torchvision.models import VGG19_Weights

            net = vgg19(weights=VGG19_Weights.IMAGENET1K_V1)
        elif weights == "random":
            # architecture-only instantiation; useful for dim smoke tests
            net = vgg19(weights=None)
        else:
            net = vgg19(weights=None)
            state = torch.load(weights, map_location="cpu", weights_only=True)
            net.load_state_dict(state)
    except Exception as e:
        raise ModelLoadFailure(f"cannot load vgg19 weights ({weights}): {e}") from e
    net.eval()
    features = net.features
    # taps: output of the last two in-place rectifications of block 5
    return TapModel(
        name="vgg19",
        mean=(0.485, 0.456, 0.406),
        std=(0.229, 0.224, 0.225),
        _prev_stack=features[:34],
        _last_stack=features[34:36],
    )


def _tiny(_weights) -> TapModel:
    """Small fixed-seed convnet for offline tests: stride 4, 16 channels."""
    g = torch.Generator().manual_seed(0)
    layers = [
        nn.Conv2d(3, 8, 3, stride=2, padding=1),
        nn.ReLU(inplace=True),
        nn.Conv2d(8, 16, 3, stride=2, padding=1),
        nn.ReLU(inplace=True),
        nn.Conv2d(16, 16, 3, stride=1, padding=1),
        nn.ReLU(inplace=True),
    ]
    for layer in layers:
        if isinstance(layer, nn.Conv2d):
            layer.weight.data = torch.randn(layer.weight.shape, generator=g) * 0.3
            layer.bias.data = torch.randn(layer.bias.shape, generator=g) * 0.1
    net = nn.Sequential(*layers).eval()
    return TapModel(
        name="tiny",
        mean=(0.5, 0.5, 0.5),
        std=(0.5, 0.5, 0.5),
        _prev_stack=net[:4],
        _last_stack=net[4:6],
    )


_REGISTRY = {"vgg19": _vgg19, "tiny": _tiny}


def load_model(name: str = "vgg19", weights=None) -> TapModel:
    if name not in _REGISTRY:
        raise ModelLoadFailure(
            f"unknown model {name!r}; choices: {sorted(_REGISTRY)}")
    return _REGISTRY[name](weights)
