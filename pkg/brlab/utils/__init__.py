"""Quadrature, file output, decay fits and job management"""
