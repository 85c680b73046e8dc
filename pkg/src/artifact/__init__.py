"""Equivariant quantum-cohomology central charges on torus-equivariant
projective spaces, exceptional-collection sorting along stability paths, and
character-level checks of induced exceptional collections."""

__version__ = "0.1.0"
