"""MIM-based GAN."""

__version__ = "0.1.0"
