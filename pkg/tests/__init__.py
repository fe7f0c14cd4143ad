"""
Test package for network log-ARCH
"""






