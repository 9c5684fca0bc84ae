"""FX rate analysis: q-Gaussian fits, MFDFA, RMT and Epps curves.

Thin wrapper over the compiled ``_core`` module; arrays come back as numpy.
"""

from ._core import (
    AlignmentError,
    DataError,
    DegenerateInputError,
    DomainError,
    Error,
    FitNonConvergence,
    QGaussianParams,
    UsageError,
    autocorrelation,
    cdf_wing,
    epps,
    fit,
    fit_power_law,
    generate,
    hyp2f1,
    mfdfa,
    mp_bounds,
    mp_density,
    pdf,
    q_exponential,
    quantile_right,
    run_cli,
    shuffle_surrogate,
)

__version__ = "0.1.0"


def main(argv=None):
    """Console entry point mirroring the fxmf executable."""
    import sys

    code, out, err = run_cli(list(sys.argv[1:] if argv is None else argv))
    sys.stdout.write(out)
    sys.stderr.write(err)
    return code
