"""Desk-scale numpy SimSiam simulator."""
