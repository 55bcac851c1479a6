from .base import Protocol, ProtocolSpec
from .registry import PROTOCOLS, build_protocol

__all__ = ["PROTOCOLS", "Protocol", "ProtocolSpec", "build_protocol"]
