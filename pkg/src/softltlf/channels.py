"""Feature-channel plans.

Lowering a surface formula produces a constraint over plain feature columns
plus a plan describing how each column is built: passed through from an
input trace, filled with a constant, or derived from a trajectory
(coordinates, velocity components, speed, acceleration magnitude, distance
to a fixed point). The trajectory lab consumes the plan; this module only
holds the data.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class PassthroughChannel:
    """Copy input feature column `index` unchanged."""

    index: int

    def describe(self) -> str:
        return f"f{self.index}"


@dataclass(frozen=True)
class ConstantChannel:
    value: float

    def describe(self) -> str:
        return f"const:{self.value!r}"


@dataclass(frozen=True)
class CoordinateChannel:
    """Position coordinate; axis 0 is x, axis 1 is y."""

    axis: int

    def describe(self) -> str:
        return "xy"[self.axis]


@dataclass(frozen=True)
class VelocityChannel:
    axis: int

    def describe(self) -> str:
        return "vx" if self.axis == 0 else "vy"


@dataclass(frozen=True)
class SpeedChannel:
    def describe(self) -> str:
        return "speed"


@dataclass(frozen=True)
class AccelChannel:
    def describe(self) -> str:
        return "accel"


@dataclass(frozen=True)
class DistanceChannel:
    """Euclidean distance from the position to the point (ox, oy)."""

    ox: float
    oy: float

    def describe(self) -> str:
        return f"dist:({self.ox!r},{self.oy!r})"


ChannelSpec = (
    PassthroughChannel
    | ConstantChannel
    | CoordinateChannel
    | VelocityChannel
    | SpeedChannel
    | AccelChannel
    | DistanceChannel
)


@dataclass(frozen=True)
class FeatureDerivationPlan:
    """Ordered channel builds; column i of the emitted trace = channels[i].

    The identity plan (no constants, no derived measurements) leaves the
    input trace untouched, whatever its width.
    """

    channels: tuple[ChannelSpec, ...] = ()
    identity: bool = False

    def __post_init__(self) -> None:
        if self.identity and self.channels:
            raise ValueError("identity plan cannot list channels")

    @property
    def channel_count(self) -> int | None:
        return None if self.identity else len(self.channels)

    def describe(self) -> list[str]:
        if self.identity:
            return ["identity"]
        return [c.describe() for c in self.channels]


IDENTITY_PLAN = FeatureDerivationPlan(identity=True)
