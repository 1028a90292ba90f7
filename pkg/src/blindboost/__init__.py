"""Two-party confidential boosting over encrypted or secret-shared data."""

__version__ = "0.1.0"
