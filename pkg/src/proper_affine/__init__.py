"""Exact root-system data and numerical affine dynamics for properly discontinuous affine group actions."""

__version__ = "0.1.0"
