"""Numerical controllers: solver, simulator, cells, training kernels and the MLRNN."""
