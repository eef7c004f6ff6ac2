"""MISO: cell programs with double-buffered state, parallel schedulers and
replicated (DMR) execution."""

__version__ = "0.1.0"
