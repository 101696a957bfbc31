from ._levycal import *  # noqa: F401,F403
from ._levycal import LevycalError

__all__ = [n for n in dir() if not n.startswith("_")]
