"""Classifier networks for single-channel intensity images."""

from __future__ import annotations

import torch
import torch.nn as nn


class SmallCnn(nn.Module):
    """Two conv + two fully connected layers; the desk-scale default.

    BatchNorm makes the network insensitive to the absolute intensity
    scale, which varies by orders of magnitude across coherence levels
    since the inputs are deliberately unnormalized.
    """

    def __init__(self, num_classes: int, input_size: int = 128):
        super().__init__()
        self.features = nn.Sequential(
            nn.Conv2d(1, 16, kernel_size=5, stride=2, padding=2),
            nn.BatchNorm2d(16),
            nn.ReLU(inplace=True),
            nn.MaxPool2d(2),
            nn.Conv2d(16, 32, kernel_size=5, stride=2, padding=2),
            nn.BatchNorm2d(32),
            nn.ReLU(inplace=True),
            nn.MaxPool2d(2),
        )
        side = input_size // 16
        self.classifier = nn.Sequential(
            nn.Flatten(),
            nn.Linear(32 * side * side, 128),
            nn.ReLU(inplace=True),
            nn.Linear(128, num_classes),
        )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.classifier(self.features(x))


def build_model(network: str, num_classes: int, input_size: int) -> nn.Module:
    if network == "small-cnn":
        return SmallCnn(num_classes=num_classes, input_size=input_size)
    if network == "resnet18":
        from torchvision.models import resnet18

        model = resnet18(num_classes=num_classes)
        # adapt the stem to single-channel input
        model.conv1 = nn.Conv2d(1, 64, kernel_size=7, stride=2, padding=3, bias=False)
        return model
    raise ValueError(f"unknown network {network!r}")
