"""Reaction-diffusion dynamics on infinite networks with flat far fields.

The heavy lifting lives in the compiled extension; this package re-exports
its surface. In an installed wheel the extension sits inside the package;
in a build tree it is importable from the build directory.
"""

try:
    from ._netflat import *  # noqa: F401,F403
    from ._netflat import __version__  # noqa: F401
except ImportError:  # build-tree layout
    from _netflat import *  # noqa: F401,F403
    from _netflat import __version__  # noqa: F401
