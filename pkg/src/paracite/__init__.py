"""Paragraph-level citation recommendation toolkit.

A small end-to-end engine for recommending articles to cite in a
related-work paragraph, queried by the citing article's title and
abstract plus the paragraph's topic sentence. Ships a hashed-feature
text encoder trained with a quadruplet hinge loss over hard negative
pools, exact nearest-neighbor ranking, standard ranking metrics, a CLI
pipeline and an HTTP recommendation service.
"""

__version__ = "0.1.0"
