"""Genus-2 theta functions, period matrices and commuting matrix differential operators."""

__version__ = "0.1.0"
