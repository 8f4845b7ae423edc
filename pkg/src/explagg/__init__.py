"""Aggregate feature-importance explanations into one robust ranking.

Components score each explanation on rank-based complexity, stability, and
faithfulness; an MCDM scorer (TOPSIS or EDAS) turns the metric matrix into
per-explainer weights; a weighted rank aggregator (weighted sum, Borda, or
Condorcet) fuses the component rankings.
"""

__version__ = "0.1.0"

from .core import (Explanation, FeatureSchema, Ranking, Weights,
                   minmax_normalize, rank_features, squared_inverse_scores)
from .metrics import (MetricVector, NrcConfig, nrc, rank_faithfulness,
                      rank_stability, traditional_complexity,
                      traditional_faithfulness, traditional_sensitivity)
from .mcdm import BENEFIT, COST, DecisionMatrix, McdmResult, edas, scores_to_weights, topsis
from .rankagg import (AggregationInput, borda_aggregate, condorcet_aggregate,
                      wsum_aggregate)
from .perturb import AutoencoderModel, NoiseConfig, latent_neighbors, perturb_dataset, train_autoencoder
from .forest import ForestModel, train_forest
from .explainers import (AnchorRule, ExplainerFitState, Predictor,
                         anchor_like_explain, lime_like_explain, refit,
                         shapley_exact, shapley_sample_explain)
from .stats import (FriedmanResult, count_significantly_worse, finner_posthoc,
                    friedman_test, pearson, spearman)
from .ingest import Dataset, RawTable, load_csv, preprocess, split
from .pipeline import (AggregationReport, ExperimentReport, PipelineConfig,
                       explain_instance, prepare_context, run_experiment, run_rq1)

__all__ = [name for name in dir() if not name.startswith("_")]
