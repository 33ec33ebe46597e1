"""delaylab: spectral analysis of delay-embedding matrices of linear RNNs.

The package splits into a numerical oracle (matcore), exact closed
forms (spectra), matrix construction and fast factorized solves
(delaymat), conditioning/volume bounds with regime tags (bounds), a
recurrence simulator with delay-vector plumbing (lrnn), reproducible
sweeps (experiments) and a CLI (cli).
"""

__version__ = "0.1.0"

from .bounds import (  # noqa: F401
    BoundReport,
    EmbeddingVerdict,
    bound_report,
    embedding_condition,
    general_cond_bound,
    hermitian_cond_bound,
    hermitian_det_bound,
    scalar_cond_bound,
    scalar_det_bound,
)
from .delaymat import (  # noqa: F401
    DelaySpec,
    HermitianFactorization,
    WClass,
    apply_fast_pinv,
    build_delay_matrix,
    build_gram,
    hermitian_factorization,
    shuffle_permutation,
    sine_basis,
)
from .exceptions import DelayLabError  # noqa: F401
from .lrnn import (  # noqa: F401
    DelayVectors,
    RecurrenceConfig,
    SignalKind,
    Trace,
    assemble_delay_vectors,
    generate_signal,
    reconstruct_min_norm,
    run_recurrence,
    verify_delay_relation,
)
from .matcore import (  # noqa: F401
    SpectralSummary,
    generalized_determinant,
    hermitian_eigenvalues,
    pseudo_inverse,
    singular_values,
    spectral_summary,
)
from .spectra import (  # noqa: F401
    ToeplitzTriSpec,
    hermitian_gen_det,
    hermitian_gram_eigs,
    scalar_gen_det,
    scalar_singular_values,
    toeplitz_tridiag_det,
    toeplitz_tridiag_eigs,
)
