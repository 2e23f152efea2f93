"""Topology-encoded latent distance, spectral network enhancement and restart diffusion."""
from .core import (TopoLaDistanceMatrix, TopoLaParams, cn_matrix, fastnr_enhance,
                   lambda_grid, nr_enhance, singular_transform, theorem3_max_violation,
                   topola_distance, topola_series)
from .diffusion import (DiffusionResult, RwrParams, cnrwr, rwr, rwr_closed_form,
                        transition_matrix, trwr)
from .netcore import (AdjacencyMatrix, EdgeList, IngestError, NodeIndex, load_dense_matrix,
                      load_edge_list, save_dense_matrix, save_edge_list)
from .paths import PathCensus, loop_free_paths, path_census, walk_count
from .spectral import (QbFactors, SvdFactors, condition_number, full_svd, randqb_fp,
                       sin_theta, truncate_to_svd)

__version__ = "0.1.0"
