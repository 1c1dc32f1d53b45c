"""Numerical services: special functions, kernels, decomposition, geometry, operators, experiments"""
