"""
Test suite for padepde
"""
