"""GWP100 screening from SMILES: descriptors, PCA, quantile targets and MLP ensembles."""

from __future__ import annotations

import logging
import os

__version__ = "0.1.0"

_level = os.environ.get("GWP_SCREEN_LOG")
if _level:
    logging.basicConfig(level=_level.upper(), format="%(levelname)s %(name)s: %(message)s")
logging.getLogger(__name__).addHandler(logging.NullHandler())
