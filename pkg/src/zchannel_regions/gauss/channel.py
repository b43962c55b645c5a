"""Gaussian Z channel: raw model and its unit-noise standard form.

Raw model:
    Y1* = a11 X1* + a21 X2* + (a11 + a21) S + Z1*,   Z1* ~ N(0, N1)
    Y2* = a22 X2* + a22 S + Z2*,                     Z2* ~ N(0, N2)

Standard model (after scaling each output to unit noise):
    Y1 = X1 + a X2 + a1 S + Z1
    Y2 = X2 + a2 S + Z2
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path

from pydantic import ValidationError

from zchannel_regions.errors import ChannelError
from zchannel_regions.models import (
    CHANNEL_ADAPTER,
    ChannelSpec,
    RawChannelSpec,
    StandardChannelSpec,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GaussianZChannel:
    """Standard-form channel; ``raw`` keeps the model it was scaled from, if any."""

    a: float
    a1: float
    a2: float
    P1: float
    P2: float
    Q: float
    raw: RawChannelSpec | None = None

    def __post_init__(self) -> None:
        for name in ("a", "a1", "a2", "P1", "P2", "Q"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ChannelError(f"{name} must be finite, got {value}")
        for name in ("P1", "P2", "Q"):
            if getattr(self, name) < 0:
                raise ChannelError(f"{name} must be nonnegative, got {getattr(self, name)}")

    @property
    def total_power_y1(self) -> float:
        """1 + P1 + a^2 P2: variance of the interference-free part of Y1."""
        return 1.0 + self.P1 + self.a**2 * self.P2

    def with_q(self, q: float) -> GaussianZChannel:
        return GaussianZChannel(self.a, self.a1, self.a2, self.P1, self.P2, q, self.raw)

    def to_spec(self) -> StandardChannelSpec:
        return StandardChannelSpec(
            a=self.a, a1=self.a1, a2=self.a2, P1=self.P1, P2=self.P2, Q=self.Q
        )

    @classmethod
    def from_spec(cls, spec: ChannelSpec) -> GaussianZChannel:
        if isinstance(spec, RawChannelSpec):
            return standardize(spec)
        return cls(spec.a, spec.a1, spec.a2, spec.P1, spec.P2, spec.Q)


def standardize(raw: RawChannelSpec) -> GaussianZChannel:
    """Scale a raw channel to unit noise variances and unit direct gains."""
    if raw.a22 == 0:
        raise ChannelError("a22 = 0: the cross gain cannot be normalized")
    if raw.N1 <= 0 or raw.N2 <= 0:
        raise ChannelError(f"noise variances must be positive, got N1={raw.N1}, N2={raw.N2}")
    channel = GaussianZChannel(
        a=(raw.a21 / raw.a22) * math.sqrt(raw.N2 / raw.N1),
        a1=(raw.a11 + raw.a21) / math.sqrt(raw.N1),
        a2=raw.a22 / math.sqrt(raw.N2),
        P1=raw.a11**2 * raw.P1star / raw.N1,
        P2=raw.a22**2 * raw.P2star / raw.N2,
        Q=raw.Q,
        raw=raw,
    )
    logger.debug(
        "Standardized %s -> a=%.6g a1=%.6g a2=%.6g", raw, channel.a, channel.a1, channel.a2
    )
    return channel


def as_raw(channel: GaussianZChannel) -> RawChannelSpec:
    """A raw model with unit noises whose standard form is ``channel``.

    Gains are a22 = a2, a21 = a*a2 and a11 = a1 - a*a2; channels with a2 = 0,
    or with a11 = 0 but P1 > 0, have no raw counterpart.
    """
    if channel.a2 == 0:
        raise ChannelError("a2 = 0 has no raw counterpart (a22 would vanish)")
    a22 = channel.a2
    a21 = channel.a * a22
    a11 = channel.a1 - a21
    if a11 == 0 and channel.P1 > 0:
        raise ChannelError("a1 = a*a2 with P1 > 0 has no raw counterpart (a11 would vanish)")
    p1star = channel.P1 / a11**2 if a11 else 0.0
    return RawChannelSpec(
        a11=a11, a21=a21, a22=a22, N1=1.0, N2=1.0, Q=channel.Q,
        P1star=p1star, P2star=channel.P2 / a22**2,
    )


def load_channel(path: str | Path) -> GaussianZChannel:
    """Load a raw or standard channel JSON file (``"form"`` picks the model)."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        spec = CHANNEL_ADAPTER.validate_json(text)
    except ValidationError as exc:
        raise ChannelError(f"invalid channel file {path}: {exc}") from exc
    channel = GaussianZChannel.from_spec(spec)
    logger.info("Loaded %s channel from %s", spec.form, path)
    return channel
