"""opnet"""
