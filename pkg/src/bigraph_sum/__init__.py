"""Unsupervised extractive summarization with bipartite graph autoencoder embeddings."""

__version__ = "0.1.0"
