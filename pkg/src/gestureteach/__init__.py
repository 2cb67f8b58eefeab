"""gestureteach: teach an image classifier by showing objects to a camera.

The package covers the full loop: hand segmentation, gesture-guided object
highlights, in-situ capture of inferred masks, joint classification +
segmentation training, saliency blending, evaluation, and a streaming
teaching service.
"""

__version__ = "0.1.0"
