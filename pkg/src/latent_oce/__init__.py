"""Ordinal causal effects in latent Gaussian DAG models."""

from .datagen import OrdinalDataset, RngHandle, random_model, sample_ordinal
from .errors import (
    DataError,
    DegenerateIntervalError,
    DegenerateLevelError,
    DomainError,
    EstimationError,
    LatentOceError,
    ModelError,
    NumericError,
    QueryError,
    StructureError,
)
from .estimation import fit_model
from .graph import Dag
from .intervention import post_intervention
from .oce import InterventionQuery, OceTable, oce_closed_form, oce_cumulative, oce_numeric, oce_tensor
from .oracle import OracleEstimate, oracle_oce
from .sem import LatentDagModel, covariance, make_model, standardize, total_effect

__version__ = "0.1.0"

__all__ = [
    "Dag",
    "DataError",
    "DegenerateIntervalError",
    "DegenerateLevelError",
    "DomainError",
    "EstimationError",
    "InterventionQuery",
    "LatentDagModel",
    "LatentOceError",
    "ModelError",
    "NumericError",
    "OceTable",
    "OracleEstimate",
    "OrdinalDataset",
    "QueryError",
    "RngHandle",
    "StructureError",
    "covariance",
    "fit_model",
    "make_model",
    "oce_closed_form",
    "oce_cumulative",
    "oce_numeric",
    "oce_tensor",
    "oracle_oce",
    "post_intervention",
    "random_model",
    "sample_ordinal",
    "standardize",
    "total_effect",
]
