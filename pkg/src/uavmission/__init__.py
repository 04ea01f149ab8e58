"""Multi-agent UAV mission generation from satellite imagery."""

__version__ = "0.1.0"
