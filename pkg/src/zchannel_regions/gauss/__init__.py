"""Gaussian Z channel: standard form and dirty-paper regions."""
