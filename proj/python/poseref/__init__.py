"""Scene-level object pose refinement: geometry, plausibility, refinement
environment, rendering-based scoring and ADD/ADI evaluation."""

try:
    from ._poseref import *  # noqa: F401,F403
    from ._poseref import __version__  # noqa: F401
except ImportError:  # built extension on PYTHONPATH (development layout)
    from _poseref import *  # noqa: F401,F403
    from _poseref import __version__  # noqa: F401
