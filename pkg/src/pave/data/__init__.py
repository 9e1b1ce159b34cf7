"""Bundled fixture network, POIs and benchmark suite."""
