"""Chewing SSL.

Self-supervised chewing detection from in-ear audio: contrastive pretraining of
a 1D-CNN feature extractor on unlabeled windows, supervised training of a small
classifier head on frozen features, and rule-based aggregation of window
predictions into chews, bouts and meals.
"""

__version__ = "0.1.0"
__license__ = "MIT"
