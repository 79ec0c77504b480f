"""Clustering methods applied to index feature matrices."""

from .distances import FeatureMatrix, pairwise_distances, whiten
from .hierarchical import LINKAGES, hierarchical, lance_williams, linkage_matrix
from .kernel_kmeans import KERNELS, auto_sigma, gram_matrix, kernel_kmeans
from .kmeans import METRICS, kmeans
from .spectral import gaussian_affinity, spectral, spectral_from_affinity

__all__ = [
    "FeatureMatrix", "pairwise_distances", "whiten",
    "LINKAGES", "hierarchical", "lance_williams", "linkage_matrix",
    "KERNELS", "auto_sigma", "gram_matrix", "kernel_kmeans",
    "METRICS", "kmeans",
    "gaussian_affinity", "spectral", "spectral_from_affinity",
]
