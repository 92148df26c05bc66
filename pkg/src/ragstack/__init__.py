"""Self-contained retrieval-augmented generation stack.

Pipeline: documents are ingested from a JSONL manifest (plain text, Markdown,
HTML), split into overlapping token-window chunks, embedded into unit-norm
vectors, and stored in a persistent vector store with exact and approximate
(HNSW) cosine search plus metadata pre-filtering. A query engine assembles
budget-constrained prompts from retrieved chunks and returns answers together
with their source chunks. An HTTP service exposes multi-session chat with a
strict FIFO generation queue, and an evaluation harness measures retrieval
recall on synthetic needle corpora.
"""

__version__ = "0.1.0"
