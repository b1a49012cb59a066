"""
Verify 模組 - 以 oracle 與有限差分驗證各定理的性質 suites
"""

from .checks import Check, SuiteReport, relative_error, ladder_ratio_check
from .suites import SUITES, run_suite

__all__ = [
    'Check',
    'SuiteReport',
    'relative_error',
    'ladder_ratio_check',
    'SUITES',
    'run_suite',
]
