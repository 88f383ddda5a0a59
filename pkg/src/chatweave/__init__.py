"""chatweave: weave chit-chat into task-oriented dialogue corpora.

The pipeline runs corpus ingestion, candidate generation against pluggable
backends, hybrid filtering, human annotation (with an HTTP service and
agreement statistics), training-sequence construction in three flavors,
inference-time response arranging with a frequency ceiling, and automatic
plus pairwise-human evaluation.
"""

__version__ = "0.1.0"
