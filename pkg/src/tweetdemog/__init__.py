"""Life-stage inference and retweet-network analysis for tweet corpora."""

__version__ = "0.1.0"
