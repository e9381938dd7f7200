"""
Utility functions - logging, input validation, reports, timing
"""

__all__ = ['logger', 'validation', 'reports', 'perf_monitor']
