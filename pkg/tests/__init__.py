"""Tests for the brittlehom package."""
