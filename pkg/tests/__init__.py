"""Test package for hpcforge."""
