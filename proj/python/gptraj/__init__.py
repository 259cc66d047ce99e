"""Quantum-trajectory Monte Carlo for geometric phases of a driven
dissipative two-level system."""

try:
    from ._gptraj import *  # noqa: F401,F403  (installed package layout)
    from ._gptraj import __version__  # noqa: F401
except ImportError:  # pragma: no cover - build-tree layout
    from _gptraj import *  # noqa: F401,F403
    from _gptraj import __version__  # noqa: F401
