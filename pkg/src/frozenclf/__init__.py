"""frozenclf: trainable classification heads over frozen transformer features.

Subpackages cover the full pipeline: a minimal autodiff tensor engine
(:mod:`frozenclf.tensor`), feature-file and embedding I/O
(:mod:`frozenclf.feature_io`), tweet cleaning (:mod:`frozenclf.textprep`),
key-phrase stratified re-splitting (:mod:`frozenclf.partition`), the
classification-head zoo (:mod:`frozenclf.blocks`), training/evaluation
protocols (:mod:`frozenclf.trainer`, :mod:`frozenclf.experiment`) and the
tf-idf/SVM baselines (:mod:`frozenclf.baselines`). The ``frozenclf`` CLI
wires these into reproducible pipelines.
"""

__version__ = "0.1.0"
