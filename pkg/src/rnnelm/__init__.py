"""Classification with the random-neural-network cluster activation inside
an extreme learning machine, plus PCA preprocessing and benchmark tooling."""

from .datasets import Dataset, load_mnist, load_norb, synthetic_blobs
from .elm import (
    ACTIVATION_KINDS,
    Activation,
    AdaptConfig,
    ElmModel,
    accuracy,
    adapt_output,
    fit_output_weights,
    hidden_layer,
    init_weights,
    load_model,
    nll_cost,
    nll_gradient,
    one_hot,
    predict_labels,
    predict_scores,
    save_model,
)
from .experiments import (
    DatasetSpec,
    ExperimentConfig,
    RunResult,
    compare_activations,
    preset_config,
    run_experiment,
    sweep,
)
from .numerics import pinv, svd
from .pca import PcaModel, pca_fit, pca_inverse_transform, pca_transform
from .rnn import (
    DEFAULT_CLUSTER,
    ClusterParams,
    RnnNetwork,
    cluster_fixed_point,
    cluster_quadratic,
    marginal_pmf,
    rnn_steady_state,
    zeta,
    zeta_map,
)

__version__ = "0.1.0"
