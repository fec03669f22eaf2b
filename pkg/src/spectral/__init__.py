# Spectral primitives package
