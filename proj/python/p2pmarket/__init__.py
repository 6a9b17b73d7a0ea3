"""Bilateral peer-to-peer electricity market clearing."""

from ._p2pmarket import *  # noqa: F401,F403
from ._p2pmarket import __version__  # noqa: F401
