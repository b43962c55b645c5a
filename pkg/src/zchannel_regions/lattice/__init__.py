"""Lattice-strategy rate formulas and dithered mod-lattice simulation."""
