"""Unit tests for maassforge."""
