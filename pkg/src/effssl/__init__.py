"""Training-efficiency toolkit for self-supervised learning.

Schedules (cosine, warm-up cosine, 1-cycle, fixed 1-cycle), the Super
Progressive resolution/magnitude curriculum, Hard Augment pair selection,
FLOPs cost accounting, an LR range test, and a numpy SimSiam simulator that
runs the combined loop end to end.
"""
__version__ = "0.1.0"
