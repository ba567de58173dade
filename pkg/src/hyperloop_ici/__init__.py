"""Doppler-induced ICI analysis for OFDM links on ultra-high-speed vehicles."""
__version__ = "0.1.0"
