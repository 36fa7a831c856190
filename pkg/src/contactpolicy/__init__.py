"""Contact-guided diffusion policy on a deterministic 2D Push-T environment."""

__version__ = "0.1.0"
