"""Point-coupled oscillator and 1D wave field toolkit."""
__version__ = "0.1.0"
