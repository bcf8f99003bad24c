"""Cellular consecutive embeddings of leveled spatial graphs in closed orientable surfaces."""

from __future__ import annotations

from .core import (
    ArityError,
    ConflictGraph,
    EndpointSymbol,
    Fragment,
    LevelConflictError,
    LevelGapError,
    SpineList,
    SpineListError,
    SpineSyntaxError,
    canonicalize,
    conflict_graph,
    conflicts,
    cyclic_level_shift,
    is_representative,
    parse_spine_list,
    relevel,
    representative_leveling,
    serialize_spine_list,
)
from .general import (
    ContractionMap,
    ExpandedEmbedding,
    ExpansionError,
    GeneralFragment,
    GeneralLeveledGraph,
    InvalidGraph,
    PreconditionError,
    expand_embedding,
    expand_graph,
    five_level_embed,
    four_level_embed,
    reduce_to_hamiltonian,
    run_algorithm2,
    split_vertices,
    verify_expanded,
)
from .patterns import CylinderCandidate, HalftwistClass, check_in_between, check_level_order, match_disk_sublists
from .search import (
    CapExceeded,
    SearchConfig,
    SearchOutcome,
    enumerate_labelings,
    enumerate_partitions,
    exhaustive_oracle,
    run_algorithm1,
)
from .surface import (
    EmbeddingResult,
    GlueError,
    SurfaceState,
    attach_punctured_sphere,
    circularity,
    euler_genus,
    glue_cylinder,
    init_sphere,
    trace_faces,
    verify,
)

__version__ = "0.1.0"
