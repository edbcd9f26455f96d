"""Passive, active, semi-supervised and hybrid learning under an annotation budget."""

from .core import (ConfigurationError, ContractError, Dataset, FoldSplit, LabeledSet, NumericError,
                   ParseError, RngStream, UnlabeledPool, accuracy, load_csv, make_folds, save_csv,
                   standardize)
from .model import CostCounters, Hyper, ModelParams, SoftmaxRegression, predict, predict_proba, train

__version__ = "0.1.0"
