"""Random arborescence sampling for weighted digraphs."""

from .errors import (ArbsampleError, CoverageFailureError, GraphFormatError,
                     InvalidGraphError, NoCycleError, SingularSystemError,
                     TooLargeError, TrappedClusterError, UnknownTreeError,
                     UnreachableVertexError, ZeroConditioningError)
from .graphs import (Arborescence, WeightedDigraph, boundary_edges,
                     is_eulerian, is_strongly_connected, reverse_graph,
                     validate_arborescence, weight_floor_connected,
                     weighted_out_degree)
from .hierarchy import Cycle, Hierarchy, build_hierarchy, find_cycle
from .oracle import (ArborescenceCatalog, count_arborescences,
                     distribution_report, enumerate_arborescences)
from .randomness import RandomnessPlan
from .reduction import (ReductionResult, arborescence_distribution_preserved_check,
                        reduce, root_distribution, sample_root)
from .sampler import (ArborescenceSampler, EndTable, all_edges, choose_budget,
                      jumping_edges, sample_arborescence,
                      sequential_aldous_broder)
from .transcripts import Transcript, extract_first_visits, transcript_covers
from .walks import (ExitTable, SchurGraph, conditioned_exit_table,
                    exit_distribution, schur_complement,
                    stationary_distribution, visit_count)

__version__ = "0.1.0"
