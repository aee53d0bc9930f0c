"""End-to-end tests for curvmix."""
