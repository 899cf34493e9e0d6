"""Combined perturbation bounds for Hermitian eigenproblems and the SVD,
verified along gauge-tracked homotopy paths."""

__version__ = "0.1.0"
