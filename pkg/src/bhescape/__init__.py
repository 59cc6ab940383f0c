"""Final-state projection simulator: channels, random ensembles and oracles."""
from .finalstate import (
    AnnihilatedInputError,
    BipartitePureState,
    InputState,
    ProjectionChannel,
    apply_channel,
    channel_from_final_state,
    channel_from_random_state,
    escape_fidelity,
    hm_final_state,
    maximally_entangled,
    product_final_state,
    typical_fidelity_estimate,
)
from .randsrc import RngStream, ginibre, haar_unitary, random_pure_state
from .stats import SchmidtSpectrum, schmidt_spectrum

__version__ = "0.1.0"
