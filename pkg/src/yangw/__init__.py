"""Exact verification engine for affine Yangian and W-algebra identities,
checked degreewise on truncated vacuum modules."""

__version__ = "0.1.0"
