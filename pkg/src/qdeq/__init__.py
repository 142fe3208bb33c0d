"""Linear q-difference equations: operators, Newton polygons, series solutions,
analytic continuation between ``Q = 0`` and ``Q = infinity``, and the ``q -> 1`` limit.

>>> from qdeq import parse_operator, newton_polygon, QUINTIC
>>> [(i, str(e)) for i, e in newton_polygon(parse_operator(QUINTIC)).vertices]
[(0, '1'), (20, '0'), (25, '0')]
"""

from .algebra import *  # noqa: F401,F403
from .confluence import *  # noqa: F401,F403
from .connection import *  # noqa: F401,F403
from .errors import *  # noqa: F401,F403
from .operator import *  # noqa: F401,F403
from .qspecial import *  # noqa: F401,F403
from .solver import *  # noqa: F401,F403

__version__ = "0.1.0"
