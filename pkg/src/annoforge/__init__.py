"""annoforge: self-hosted multi-user image annotation platform.

Lock-managed polygon annotation with reference assistance, a quality-check
workflow, uncertainty-sampling active learning, a dataset pipeline with
split/augment/export, a model-agnostic worker protocol, and IoU evaluation.
"""

__version__ = "0.1.0"
