"""Quaternion Fourier and Stockwell transforms on sampled 2-D fields."""
