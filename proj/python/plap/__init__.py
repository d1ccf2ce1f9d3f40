from ._plap import *  # noqa: F401,F403
from ._plap import InvalidConfig, IoError, NonConvergence, ParseError, PlapError  # noqa: F401
