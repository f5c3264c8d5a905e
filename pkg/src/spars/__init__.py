"""Semilinear sparse (SpARS) models for approximately eventually periodic signals."""

from .errors import (CsvParseError, DegenerateInputError, DivergenceError, ModelFormatError,
                     ModelVersionError, RangeError, RankDeficiencyError, ShapeError,
                     SparsError, StageError, TrainingError)
from .signal_core import (AepProfile, LagEstimate, TimeSeries, TrajectoryMatrix, WindowVector,
                          autocorrelation, estimate_lag, estimate_period, hankel, load_csv,
                          save_csv, window)
from .sparse_solve import (SparseSolveReport, ThresholdedRank, sparse_lsq, sparsify_matrix,
                           thresholded_rank)
from .linear_ar import (ArCoefficients, CompanionMatrix, companion, fit_ar, fit_dense_ar,
                        predict_linear, shift_consistency)
from .gru_block import (GruParams, GruState, Normalization, TrainingConfig, gru_forward,
                        gru_gradients, gru_step, sparsify_input_weights, train_gru)
from .mixer_model import (ForecastResult, GruBlock, SparsConfig, SparsModel, fit_spars,
                          holdout_rmse, load_model, predict_one, rolling_forecast, save_model)
from .spectra_diag import ApSection, SpectrumReport, ap_diagnose, krylov_section, spectrum_report

__all__ = [
    "CsvParseError",
    "DegenerateInputError",
    "DivergenceError",
    "ModelFormatError",
    "ModelVersionError",
    "RangeError",
    "RankDeficiencyError",
    "ShapeError",
    "SparsError",
    "StageError",
    "TrainingError",
    "AepProfile",
    "LagEstimate",
    "TimeSeries",
    "TrajectoryMatrix",
    "WindowVector",
    "autocorrelation",
    "estimate_lag",
    "estimate_period",
    "hankel",
    "load_csv",
    "save_csv",
    "window",
    "SparseSolveReport",
    "ThresholdedRank",
    "sparse_lsq",
    "sparsify_matrix",
    "thresholded_rank",
    "ArCoefficients",
    "CompanionMatrix",
    "companion",
    "fit_ar",
    "fit_dense_ar",
    "predict_linear",
    "shift_consistency",
    "GruParams",
    "GruState",
    "Normalization",
    "TrainingConfig",
    "gru_forward",
    "gru_gradients",
    "gru_step",
    "sparsify_input_weights",
    "train_gru",
    "ForecastResult",
    "GruBlock",
    "SparsConfig",
    "SparsModel",
    "fit_spars",
    "holdout_rmse",
    "load_model",
    "predict_one",
    "rolling_forecast",
    "save_model",
    "ApSection",
    "SpectrumReport",
    "ap_diagnose",
    "krylov_section",
    "spectrum_report",
]

__version__ = "0.1.0"
