"""
InImNet Library

Invariant imbedding networks：以輸入深度 p 為變數的 forward / backward pass、
Jacobian 近似、參數訓練與驗證 suites
"""

__version__ = "1.0.0"
