"""Python surface of the aalf toolkit.

Everything is implemented in the C++ extension; this package re-exports it.
"""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
