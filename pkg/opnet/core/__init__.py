"""opnet.core"""
