"""Selective efficient quantum process tomography over mutually unbiased bases."""

__version__ = "0.1.0"
