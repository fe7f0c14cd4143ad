"""
Command line entrypoint
"""
