"""
API tests for the padepde REST server
"""
