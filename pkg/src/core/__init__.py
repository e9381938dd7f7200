"""
Core OrliczLab functionality - Orlicz functions, step functions, Cesaro
diagnostics, the norm-divergence counterexample and the (dH) series test
"""

__all__ = ['orlicz', 'simplefn', 'cesaro', 'counterexample', 'dhtest', 'errors']
