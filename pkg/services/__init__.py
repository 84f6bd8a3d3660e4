"""
Services module for gfrac: special functions, expressions, quadrature,
fractional operators, power rules, verification and sweeps.
"""
