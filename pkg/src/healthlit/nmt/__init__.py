"""Desk-scale BiLSTM attention translator with hand-written backpropagation."""

from .checkpoint import Checkpoint
from .decoding import Translation, translate
from .estimator import BiLSTMTranslator
from .gradcheck import GradCheckReport, gradient_check, standard_tiny_batch
from .model import PARAM_ORDER, Batch, ForwardResult, ModelConfig, backward, forward, init_params, loss_and_grads, make_batch
from .training import TrainConfig, TrainResult, batch_schedule, train
from .vocab import BOS, EOS, PAD, SPECIALS, UNK, EncodedIds, Vocabulary, build_vocab, encode_ids

__all__ = [
    "BOS",
    "EOS",
    "PAD",
    "PARAM_ORDER",
    "SPECIALS",
    "UNK",
    "Batch",
    "BiLSTMTranslator",
    "Checkpoint",
    "EncodedIds",
    "ForwardResult",
    "GradCheckReport",
    "ModelConfig",
    "TrainConfig",
    "TrainResult",
    "Translation",
    "Vocabulary",
    "backward",
    "batch_schedule",
    "build_vocab",
    "encode_ids",
    "forward",
    "gradient_check",
    "init_params",
    "loss_and_grads",
    "make_batch",
    "standard_tiny_batch",
    "train",
    "translate",
]
