"""
Unit tests package
"""






