"""Multi-robot exploration with a hybrid Lévy-flight / PSO controller."""

__version__ = "0.1.0"
