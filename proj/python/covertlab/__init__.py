"""Hybrid covert channel simulation and entropy analysis toolkit.

Thin python surface over the C++ core: protocol field model, the encoding
schemes, hybrid multi-trapdoor embedding, covertness/entropy metrics, the
baseline entropy detector, and the published-table reproduction report.
"""

from covertlab._covertlab import *  # noqa: F401,F403
from covertlab._covertlab import __version__  # noqa: F401
