"""Arakelov invariants of adelic vector bundles and graded linear series on P^1 over Q."""

__version__ = "0.1.0"
