"""Fixed-point iteration laboratory for nonexpansive mappings on l_p spaces."""

__version__ = "0.1.0"
