import numpy as np


def max_rel_err(a, b) -> float:
    """Largest elementwise relative error, floored at absolute scale 1.

    The floor makes the check an absolute tolerance wherever both gradients
    are tiny, which is what a central-difference oracle can actually resolve.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    denom = np.maximum(1.0, np.maximum(np.abs(a), np.abs(b)))
    return float(np.max(np.abs(a - b) / denom))
