"""
test suite for scalescope.

this package contains unit and integration tests for the
scale-resolved fluctuation and spectral analysis pipeline.
"""
