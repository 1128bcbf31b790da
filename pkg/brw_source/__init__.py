"""Type-II SPDC simulator for AlGaAs Bragg reflection waveguides."""

__version__ = "1.0.0"
