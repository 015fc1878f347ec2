"""
Flask REST server for padepde
"""
