"""
Test Suite for the WLP Engine
Unit, property, pipeline and CLI tests
"""

__version__ = "1.0.0"
__author__ = "WLP Engine"
