"""Exception types shared across the package."""


class TsxfidelError(Exception):
    """Base class for all errors raised by this package."""


class MissingColumnError(TsxfidelError):
    """A required CSV column is absent from the header."""


class UnparseableCellError(TsxfidelError):
    """A CSV cell could not be parsed as the declared feature kind."""


class NonMonotonicTimestampsError(TsxfidelError):
    """Timestamps within one series are not strictly increasing and evenly spaced."""


class ConstantTargetError(TsxfidelError):
    """Target feature is constant, so min-max scaling is undefined."""


class SeriesTooShortError(TsxfidelError):
    """Series has fewer time steps than one window plus its forecast horizons."""


class EmptySplitError(TsxfidelError):
    """A train/test split would leave one side empty."""


class NotEnoughSeriesError(TsxfidelError):
    """Asked to sample more series than are available."""


class EmptyTrainingSetError(TsxfidelError):
    """Model fitting requires at least one training window."""


class DivergedLossError(TsxfidelError):
    """Training loss became non-finite."""


class ShapeMismatchError(TsxfidelError):
    """Input array dimensions do not match what the model or explainer expects."""


class DegenerateDenominatorError(TsxfidelError):
    """A score denominator (target range or absolute sum) is zero."""


class SingularSystemError(TsxfidelError):
    """The coalition regression system is singular; raise n_coalitions."""


class TooManyPlayersError(TsxfidelError):
    """Exact Shapley enumeration over 2^P coalitions is limited to small P."""


class KOutOfRangeError(TsxfidelError):
    """Ablation depth k must lie in [1, J*L]."""


class NearZeroPredictionError(TsxfidelError):
    """Relative ablation threshold is ill-posed for a near-zero prediction."""


class ConfigValidationError(TsxfidelError):
    """One or more experiment-config violations, collected before failing."""

    def __init__(self, diagnostics: list[str]):
        self.diagnostics = list(diagnostics)
        super().__init__("invalid config:\n" + "\n".join(f"  - {d}" for d in self.diagnostics))
