"""node2vec: biased walks, skip-gram training and k-means communities."""

from tweetdemog.embedding.alias import AliasTable, alias_table
from tweetdemog.embedding.communities import (
    CommunityAssignment,
    characterize_communities,
    kmeans_communities,
)
from tweetdemog.embedding.kmeans import kmeans
from tweetdemog.embedding.sgns import EmbeddingMatrix, SgnsConfig, train_sgns
from tweetdemog.embedding.walks import WalkConfig, generate_walks, walk_step_weights


def node2vec(adj, walk_config: WalkConfig, sgns_config: SgnsConfig) -> EmbeddingMatrix:
    return train_sgns(generate_walks(adj, walk_config), sgns_config)


__all__ = [
    "AliasTable", "alias_table", "CommunityAssignment", "characterize_communities",
    "kmeans_communities", "kmeans", "EmbeddingMatrix", "SgnsConfig", "train_sgns",
    "WalkConfig", "generate_walks", "walk_step_weights", "node2vec",
]
