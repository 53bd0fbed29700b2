"""
Double-IRS link-level simulator.
"""
