"""
Network log-ARCH Package
Volatility forecasting for stock panels with network spillovers between stocks.
"""

__version__ = "1.0.0"
