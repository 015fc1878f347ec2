"""
Demo applications for padepde
"""
