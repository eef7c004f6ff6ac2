"""Command line, run configuration and snapshot I/O."""
