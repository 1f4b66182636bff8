"""Mixed classical-quantum random 2-SAT toolkit.

Subpackages: ensemble (instance generation and files), qalgebra (small
complex linear algebra), snip (snippability and cores), motif
(component taxonomy and cycle counting), solver (decision procedures
and the exact kernel oracle), theory (closed forms), experiment
(Monte Carlo sweeps and scaling collapse), cli (command line).
"""

__version__ = "0.1.0"

from . import (  # noqa: F401
    constructions,
    ensemble,
    experiment,
    motif,
    qalgebra,
    snip,
    solver,
    theory,
)
