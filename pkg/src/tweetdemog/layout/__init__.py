from tweetdemog.layout.barneshut import barnes_hut_repulsion
from tweetdemog.layout.forceatlas2 import (
    ForceAtlas2,
    LayoutConfig,
    LayoutPositions,
    as_layout_graph,
    layout,
    repulsion_exact,
    repulsion_exact_vs_barneshut,
    repulsion_pairs_sum,
)

__all__ = [
    "barnes_hut_repulsion", "ForceAtlas2", "LayoutConfig", "LayoutPositions", "as_layout_graph",
    "layout", "repulsion_exact", "repulsion_exact_vs_barneshut", "repulsion_pairs_sum",
]
