"""Desk-scale evaluation harness: program generation, bug seeding, simulation."""
