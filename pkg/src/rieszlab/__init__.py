"""Two-term spectral asymptotics for the Dirichlet pseudo-relativistic operator."""

__version__ = "0.1.0"
