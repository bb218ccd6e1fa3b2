# Make core a proper package for reliable imports in tests and scripts.
__version__ = "0.1.0"
