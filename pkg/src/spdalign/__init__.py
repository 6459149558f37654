"""Domain adaptation by weighted geometric means of SPD matrices."""

from .errors import (
    ContractError,
    DataError,
    DegenerateSpectrumError,
    DisconnectedGraphError,
    IllConditionedError,
    NotPositiveDefiniteError,
    NumericalError,
    SpdAlignError,
)
from .spd import (
    SpdMatrix,
    SymEig,
    regularize,
    riccati_solve,
    riemannian_distance_sq,
    sharp_mean,
    spd_pow,
)
from .covariance import DomainDataset, empirical_covariance, pairwise_scatter
from .mmd import (
    MmdCoefficients,
    combined_source_matrix,
    mmd_coefficients,
    mmd_penalty_matrix,
    mmd_value,
)
from .diffusion import (
    DiffusionSpectrum,
    block_kernel,
    diffusion_kernel,
    diffusion_spectrum,
    knn_graph,
)
from .gca import (
    AdaptationModel,
    Algorithm,
    HyperParams,
    adapt_features,
    cascaded_gca2,
    cascaded_gca3,
    fit,
    gca1,
    gca2,
    gca3,
)
from .baselines import (
    LinearTransform,
    coral,
    no_adaptation,
    pca_baseline,
    subspace_alignment,
)

__version__ = "0.1.0"
