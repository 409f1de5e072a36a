"""epilab: slopes, epigraphical limits and steepest-descent curves of convex functions."""

__version__ = "0.1.0"
