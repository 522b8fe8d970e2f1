"""
Semantic channel-access MSE simulator package
"""

__version__ = "1.0.0"
