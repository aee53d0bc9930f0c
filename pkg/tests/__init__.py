"""Test suite for curvmix."""
