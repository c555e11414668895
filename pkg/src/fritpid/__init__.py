"""fritpid: one-shot data-driven tuning of FOPID/IOPID controllers.

A single open-loop experiment (r0, u0, y0) is turned into a fictitious
reference, and controller parameters are chosen to minimize the l1 norm of
the closed-loop model-matching error, with an explicit l1 stability bound
tracked on every candidate. Particle-swarm search does the minimization.
"""

__version__ = "0.1.0"

from . import lti_core, folib, l1_idfrit, swarm_opt, benchlab  # noqa: F401

__all__ = ["lti_core", "folib", "l1_idfrit", "swarm_opt", "benchlab"]
