"""Good/bad gait classifier: bagged CART trees and kNN, selected by CV."""
from .knn import KNN
from .metrics import CLASSES, Metrics, compute_metrics, confusion_matrix
from .model import (
    CANDIDATES,
    TrainConfig,
    TriageModel,
    encode_labels,
    evaluate,
    load_model,
    model_from_json,
    model_to_json,
    predict,
    predict_batch,
    save_model,
    split_train_test,
    stratified_folds,
    train,
)
from .tree import BaggedTrees, Tree, fit_tree

__all__ = [
    "BaggedTrees", "CANDIDATES", "CLASSES", "KNN", "Metrics", "Tree", "TrainConfig",
    "TriageModel", "compute_metrics", "confusion_matrix", "encode_labels", "evaluate",
    "fit_tree", "load_model", "model_from_json", "model_to_json", "predict",
    "predict_batch", "save_model", "split_train_test", "stratified_folds", "train",
]
