"""Test suite for recoverlab"""
