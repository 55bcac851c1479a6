from shared.errors import ConfigError
from shared.models import PlatformConfig

from .base import Protocol, ProtocolSpec
from .branch import BhbProtocol, BtbProtocol
from .cache import L1dProtocol, L1iProtocol
from .tlb import TlbProtocol

PROTOCOLS: dict[str, type[Protocol]] = {
    cls.name: cls for cls in (L1dProtocol, L1iProtocol, TlbProtocol, BhbProtocol, BtbProtocol)
}


def build_protocol(spec: ProtocolSpec, platform: PlatformConfig) -> Protocol:
    try:
        cls = PROTOCOLS[spec.name]
    except KeyError:
        raise ConfigError(f"unknown protocol {spec.name!r}") from None
    protocol = cls(platform, spec)
    top = max(protocol.trojan_base, protocol.spy_base)
    if top >= 1 << platform.address_bits:
        raise ConfigError(f"{spec.name} buffers do not fit the {platform.address_bits}-bit space of {platform.name}")
    return protocol
