"""Exact homology of finite groupoid convolution algebras.

Hochschild, cyclic and periodic cyclic homology over Q for finite
groupoids, their module sheaves and their crossed product algebras,
computed with exact rational arithmetic inside a fixed degree window.
"""

__version__ = "0.1.0"
