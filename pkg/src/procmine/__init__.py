"""Process mining over flat, multilevel and object-centric event data."""

__version__ = "0.1.0"
