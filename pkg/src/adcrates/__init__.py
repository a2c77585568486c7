"""CIR and asymptotically decoupling correlated (ADC) rate/spread models.

Closed-form and Monte Carlo zero-coupon pricing, curve construction,
calibration, and checks of stationarity, reversibility and origin hitting.
"""

__version__ = "0.1.0"

from .adc import AdcParams, StateVector
from .calibration import (
    CalibrationConfig,
    CalibrationReport,
    calibrate_model1,
    calibrate_model2,
    objective_model1,
    objective_model2,
)
from .cir import CirParams, ParameterError
from .curves import QuoteSet, YieldCurve, bootstrap_swaps, build_curve
from .mc import Model1, PathBatch, SimConfig, hitting_probability, price_zcb_mc, simulate
from .pricing import Leg, brown_dybvig, zcb_price_cir, zcb_price_model1

__all__ = [
    "AdcParams",
    "CalibrationConfig",
    "CalibrationReport",
    "CirParams",
    "Leg",
    "Model1",
    "ParameterError",
    "PathBatch",
    "QuoteSet",
    "SimConfig",
    "StateVector",
    "YieldCurve",
    "bootstrap_swaps",
    "brown_dybvig",
    "build_curve",
    "calibrate_model1",
    "calibrate_model2",
    "hitting_probability",
    "objective_model1",
    "objective_model2",
    "price_zcb_mc",
    "simulate",
    "zcb_price_cir",
    "zcb_price_model1",
]
