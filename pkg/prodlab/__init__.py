"""prodlab - exact and high-precision evaluation of Wallis-type and Catalan-type products."""

__version__ = "0.1.0"
