"""
Tests for eigenrand
"""
