"""Triple q-integral equations with third Jackson q-Bessel kernels."""

__version__ = "0.1.0"
