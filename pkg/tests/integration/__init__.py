"""
Integration tests package
"""






