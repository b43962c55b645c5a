"""Linear inequality systems, Fourier-Motzkin projection and vertex enumeration."""
