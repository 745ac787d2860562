"""Expert-search engine for ranking researchers against free-text queries.

The pipeline: publications are cleaned and term-extracted against a
recognized-term dictionary, indexed into a fielded BM25F inverted index,
aggregated into per-researcher term scores, and blended with knowledge-base
field-of-study confidence scores at query time.  Latent-factor baselines
(LSA/NMF), a browsable concept tree, prefix-trie autocomplete, and a
persistent TCP service round out the system.
"""

__version__ = "0.1.0"
