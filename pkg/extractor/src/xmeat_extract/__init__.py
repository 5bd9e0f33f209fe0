"""Embedding extraction for xmeat stimulus registries.

Reads a registry directory (registry.json plus images/), runs every
stimulus through a CLIP-style model, and writes an embedding bundle in
the xmeat on-disk format.  This package talks to xmeat only through
those documented file formats; it does not import xmeat.
"""

__version__ = "0.1.0"
