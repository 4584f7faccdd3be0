"""
Test suite for the unitary KR intersection toolkit
"""
