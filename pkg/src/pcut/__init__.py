"""Multiway spectral clustering with penalized cuts, margin rounding and
minimum-variance kernels."""
from pcut.graph import (
    AffinityGraph,
    KernelMatrix,
    LaplacianOperator,
    build_affinity,
    centered_kernel,
    feature_distances,
    laplacian,
    laplacian_kernel,
    load_dataset,
    sar_laplacian,
    standardize,
)
from pcut.partition import Partition
from pcut.relaxation import (
    Embedding,
    EigenSystem,
    build_psi,
    eigengap,
    embed_partition,
    pcut_graph,
    pcut_matrix,
    solve_minvar_relaxation,
    solve_relaxation,
)
from pcut.rounding import (
    procrustean_rounding,
    weighted_kmeans_rounding,
    yu_shi_rounding,
)
from pcut.evaluation import rand_index

__version__ = "0.1.0"
