"""sbdkit: shot boundary detection toolkit.

Synthesizes labeled transition datasets by alpha compositing, trains a
3D-CNN + SVM segment classifier, runs the windowed detection pipeline, and
evaluates detections with one-frame-overlap matching.
"""

__version__ = "0.1.0"
