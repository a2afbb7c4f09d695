"""robnet - network robustness by attack simulation and SPP-CNN prediction."""

__version__ = "0.1.0"
