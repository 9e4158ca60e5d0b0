"""Choose among masking configurations by how well each preserves feature-label correlation."""
from .advisor import AdvisoryInput, AdvisoryReport, advise, middleware_inputs, provider_inputs
from .dataset import (
    AttributeDomain,
    Dataset,
    DatasetError,
    JointDistribution,
    MarginalDistribution,
    joint,
    load_dataset,
    marginal,
)
from .evaluation import SynthSpec, generate_synthetic, run_benchmark, summarize_records, tvd
from .masking import (
    GeneratorPolicy,
    InverseImage,
    MaskingConfiguration,
    MaskingError,
    MaskingFunction,
    apply_mask,
    generate_configurations,
    inverse_image,
    masked_joint,
    masked_marginal,
)
from .reconstruction import (
    ConstraintSet,
    IpfSettings,
    reconstruct,
    sampling_reconstruct,
    uniform_init,
)
from .utility import Measure, chi_square, deviation, g3, mutual_information, utility

__version__ = "0.1.0"
