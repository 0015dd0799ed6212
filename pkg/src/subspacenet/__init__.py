"""Distributed learning under graph subspace constraints."""
