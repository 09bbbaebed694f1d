"""Named RGB channel-binding presets.

Each preset fixes (algorithm, phi, alpha) per channel plus the illumination
label the channel was designed for. The labels are informational; callers
decide which stack feeds each channel.
"""

from __future__ import annotations

from dataclasses import dataclass

from .descriptors import Algorithm


@dataclass(frozen=True)
class ChannelBinding:
    algorithm: Algorithm
    phi_degrees: float
    alpha: float
    light: str

    def as_dict(self) -> dict:
        return {
            "algo": self.algorithm.value,
            "phi": self.phi_degrees,
            "alpha": self.alpha,
            "light": self.light,
        }


@dataclass(frozen=True)
class CompositePreset:
    name: str
    red: ChannelBinding
    green: ChannelBinding
    blue: ChannelBinding

    def channels(self) -> dict[str, ChannelBinding]:
        return {"r": self.red, "g": self.green, "b": self.blue}

    def as_dict(self) -> dict:
        return {ch: binding.as_dict() for ch, binding in self.channels().items()}


PRESETS: dict[str, CompositePreset] = {
    "fig4a": CompositePreset(
        "fig4a",
        red=ChannelBinding(Algorithm.AVD, 5.0, 1.0, "red"),
        green=ChannelBinding(Algorithm.AVD, 5.0, 1.0, "green"),
        blue=ChannelBinding(Algorithm.TAU, 80.0, 1.0, "blue"),
    ),
    "fig5a": CompositePreset(
        "fig5a",
        red=ChannelBinding(Algorithm.AVD, 0.0, 1.0, "infrared"),
        green=ChannelBinding(Algorithm.FUJII, 110.0, 1.0, "infrared"),
        blue=ChannelBinding(Algorithm.TAU, 70.0, 1.0, "infrared"),
    ),
    "fig6a": CompositePreset(
        "fig6a",
        red=ChannelBinding(Algorithm.AVD, 0.0, 1.0, "infrared"),
        green=ChannelBinding(Algorithm.AVD, 110.0, 1.0, "red"),
        blue=ChannelBinding(Algorithm.AVD, 70.0, 1.0, "blue"),
    ),
    "fig6b": CompositePreset(
        "fig6b",
        red=ChannelBinding(Algorithm.AVD, 5.0, 2.0, "infrared"),
        green=ChannelBinding(Algorithm.FUJII, 50.0, 2.0, "infrared"),
        blue=ChannelBinding(Algorithm.TAU, 75.0, 2.0, "infrared"),
    ),
}
