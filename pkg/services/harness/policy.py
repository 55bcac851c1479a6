from typing import Literal

from pydantic import BaseModel, ConfigDict

from microarch.state import MicroState
from shared.errors import ConfigError, UnsupportedMitigation
from shared.logger import log
from shared.models import MITIGATION_ACTIONS, MitigationAction, PlatformConfig


class MitigationPolicy(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: Literal["none", "full", "custom"]
    actions: tuple[MitigationAction, ...] = ()

    @property
    def label(self) -> str:
        return self.name if self.name != "custom" else ",".join(self.actions)


def resolve_policy(spec: str, platform: PlatformConfig) -> MitigationPolicy:
    """Turn `none`, `full` or a comma list of actions into the actions run at each switch.

    `full` is whatever the platform supports; a custom list naming an action the
    platform lacks raises UnsupportedMitigation.
    """
    spec = spec.strip()
    if spec == "none":
        policy = MitigationPolicy(name="none")
    elif spec == "full":
        policy = MitigationPolicy(name="full", actions=platform.supported_mitigations)
    else:
        actions = [a.strip() for a in spec.split(",") if a.strip()]
        if not actions:
            raise ConfigError("empty mitigation policy")
        for action in actions:
            if action not in MITIGATION_ACTIONS:
                raise ConfigError(
                    f"unknown mitigation action {action!r} (known: {', '.join(MITIGATION_ACTIONS)})"
                )
            if action not in platform.supported_mitigations:
                raise UnsupportedMitigation(action, platform.name)
        if len(set(actions)) != len(actions):
            raise ConfigError(f"duplicate actions in policy {spec!r}")
        policy = MitigationPolicy(name="custom", actions=tuple(actions))

    log.log("MITIGATION", f"{platform.name}: policy {policy.label} -> [{', '.join(policy.actions)}]")
    return policy


def apply_policy(state: MicroState, policy: MitigationPolicy) -> None:
    for action in policy.actions:
        state.apply(action)
