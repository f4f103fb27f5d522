from .architecture import (CLASS_LABELS, Conv2D, Dense, Dropout, Flatten,
                           MaxPool2D, NetworkSpec, count_parameters,
                           disease_classifier_spec, output_shapes,
                           spec_from_dict, spec_to_dict)
from .augment import augment
from .dataset import LabeledDataset, image_to_input, normalize_label
from .evaluation import EvaluationReport, evaluate, report_from_matrix
from .model import (CnnPrediction, Model, build_network, fingerprint, forward,
                    load_model, loss_and_grads, predict, save_model)
from .training import TrainConfig, stratified_split, train

__all__ = [
    "CLASS_LABELS", "Conv2D", "Dense", "Dropout", "Flatten", "MaxPool2D",
    "NetworkSpec", "count_parameters", "disease_classifier_spec",
    "output_shapes", "spec_from_dict", "spec_to_dict",
    "augment", "LabeledDataset", "image_to_input",
    "normalize_label", "EvaluationReport", "evaluate", "report_from_matrix",
    "CnnPrediction", "Model", "build_network", "fingerprint", "forward",
    "load_model", "loss_and_grads", "predict", "save_model", "TrainConfig",
    "stratified_split", "train",
]
