"""Construction and verification of associative 3-folds in R^7."""

from . import affine, closedform, elliptic, g2core, ruled, verify
from .errors import G2AssocError

__all__ = ["affine", "closedform", "elliptic", "g2core", "ruled", "verify", "G2AssocError"]
__version__ = "0.1.0"
