"""Spreading of stabilizer Renyi entropy from local magic under random
brickwork Clifford circuits."""

__version__ = "0.1.0"
