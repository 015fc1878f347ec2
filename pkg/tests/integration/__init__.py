"""
Integration tests for the padepde CLI and corpus
"""
