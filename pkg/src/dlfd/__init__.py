"""Finite-model reasoning for the description logic DLFD."""
