"""Analysis toolkit for the 1999-2024 US mass school shooting record."""

__version__ = "0.1.0"
