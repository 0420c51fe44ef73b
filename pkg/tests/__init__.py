"""WDCE-Net test suite."""
