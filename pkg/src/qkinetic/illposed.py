"""Placeholder; implemented later in the build."""
