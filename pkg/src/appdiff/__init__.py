"""Application profiling by differential analysis of system snapshots."""

__version__ = "0.1.0"
