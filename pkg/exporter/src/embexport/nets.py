"""Embedding network architectures.

VggishNet is the standard VGG-style stack over 96x64 log-mel patches:
four conv/maxpool groups (64, 128, 256x2, 512x2 channels) and three fully
connected layers ending in the 128-wide embedding.

SoundNetStyle is an eight-layer 1-D convolutional stack over raw waveform
with taps after conv4..conv7. Channel widths are fixed so the default
conv5 tap is 512-wide, the dimension the EMB1 contract pins for soundnet
files; published SoundNet8 weights use a different channel plan and do not
load here. Embeddings are the tap activation averaged over time.
"""

from __future__ import annotations

import torch
from torch import nn

SOUNDNET_SCALE = 256.0  # waveform scaled to roughly [-256, 256]

SOUNDNET_TAPS = {"conv4": 128, "conv5": 512, "conv6": 512, "conv7": 1024}
EXPECTED_DIMS = {"soundnet": 512, "vggish": 128}


class VggishNet(nn.Module):
    def __init__(self):
        super().__init__()

        def block(cin, cout, n_convs):
            layers = []
            for i in range(n_convs):
                layers += [nn.Conv2d(cin if i == 0 else cout, cout, 3, padding=1),
                           nn.ReLU(inplace=True)]
            layers.append(nn.MaxPool2d(2, 2))
            return layers

        self.features = nn.Sequential(
            *block(1, 64, 1), *block(64, 128, 1),
            *block(128, 256, 2), *block(256, 512, 2),
        )
        self.embeddings = nn.Sequential(
            nn.Linear(512 * 6 * 4, 4096), nn.ReLU(inplace=True),
            nn.Linear(4096, 4096), nn.ReLU(inplace=True),
            nn.Linear(4096, 128),
        )

    def forward(self, patches: torch.Tensor) -> torch.Tensor:
        """(B, 96, 64) log-mel patches -> (B, 128) embeddings."""
        x = self.features(patches.unsqueeze(1))
        return self.embeddings(torch.flatten(x, 1))


class SoundNetStyle(nn.Module):
    def __init__(self):
        super().__init__()

        def conv(cin, cout, k, stride, pool=None):
            layers = [nn.Conv1d(cin, cout, k, stride=stride, padding=k // 2),
                      nn.BatchNorm1d(cout), nn.ReLU(inplace=True)]
            if pool:
                layers.append(nn.MaxPool1d(pool))
            return nn.Sequential(*layers)

        self.conv1 = conv(1, 16, 64, 2, pool=8)
        self.conv2 = conv(16, 32, 32, 2, pool=8)
        self.conv3 = conv(32, 64, 16, 2)
        self.conv4 = conv(64, 128, 8, 2)
        self.conv5 = conv(128, 512, 4, 2, pool=4)
        self.conv6 = conv(512, 512, 4, 2)
        self.conv7 = conv(512, 1024, 4, 2)
        self.conv8 = nn.Conv1d(1024, 1024, 4, stride=2, padding=2)

    def forward(self, waveforms: torch.Tensor, tap: str = "conv5") -> torch.Tensor:
        """(B, 16000) waveforms in [-1, 1] -> (B, tap width) embeddings."""
        if tap not in SOUNDNET_TAPS:
            raise ValueError(f"tap must be one of {sorted(SOUNDNET_TAPS)}, got {tap!r}")
        x = (waveforms * SOUNDNET_SCALE).unsqueeze(1)
        for name in ("conv1", "conv2", "conv3", "conv4", "conv5", "conv6", "conv7"):
            x = getattr(self, name)(x)
            if name == tap:
                return x.mean(dim=2)
        raise AssertionError("unreachable")


def build_net(net_name: str) -> nn.Module:
    if net_name == "vggish":
        return VggishNet()
    if net_name == "soundnet":
        return SoundNetStyle()
    raise ValueError(f"unknown network {net_name!r}")
