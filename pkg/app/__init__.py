"""
Texture Mapping Frame Interpolator
Flow-guided block texture mapping for video frame interpolation.
"""

__version__ = "1.0.0"
