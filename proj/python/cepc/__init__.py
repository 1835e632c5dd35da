"""Constant-envelope quantized precoding with per-AP power control for the
cell-free massive MIMO-OFDM downlink."""

from ._cepc import *  # noqa: F401,F403
from ._cepc import __version__  # noqa: F401
