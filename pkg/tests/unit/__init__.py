"""
Unit tests for padepde
"""
