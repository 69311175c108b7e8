"""Transport recursion, weighted geodesic transform and inversion for magnetic scattering."""

__version__ = "0.1.0"
