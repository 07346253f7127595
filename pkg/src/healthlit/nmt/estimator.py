"""scikit-learn style wrapper around the BiLSTM translator."""

from __future__ import annotations

from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ..errors import ContractError
from .checkpoint import Checkpoint
from .decoding import translate
from .model import ModelConfig
from .training import TrainConfig, train
from .vocab import build_vocab


def _check_text_pairs(X, y):
    X = list(X)
    if y is None:
        raise ContractError("y (target sentences) is required")
    y = list(y)
    if len(X) != len(y):
        raise ContractError(f"X has {len(X)} sentences but y has {len(y)}")
    if not X:
        raise ContractError("cannot fit on zero sentences")
    return X, y


class BiLSTMTranslator(BaseEstimator):
    """Sentence translator: BiLSTM encoder, bilinear attention, LSTM decoder.

    ``fit(X, y)`` takes source and target sentences (strings or
    :class:`~healthlit.text.Sentence`); ``predict(X)`` returns the decoded
    strings. Fitted attributes: ``vocab_``, ``checkpoint_``, ``loss_trace_``.
    """

    def __init__(
        self,
        embed_dim=32,
        hidden_dim=64,
        max_source_len=60,
        max_target_len=60,
        learning_rate=5e-3,
        steps=1000,
        batch_size=16,
        clip_norm=5.0,
        log_every=50,
        min_frequency=1,
        max_vocab_size=None,
        decode="greedy",
        beam_size=4,
        seed=0,
    ):
        self.embed_dim = embed_dim
        self.hidden_dim = hidden_dim
        self.max_source_len = max_source_len
        self.max_target_len = max_target_len
        self.learning_rate = learning_rate
        self.steps = steps
        self.batch_size = batch_size
        self.clip_norm = clip_norm
        self.log_every = log_every
        self.min_frequency = min_frequency
        self.max_vocab_size = max_vocab_size
        self.decode = decode
        self.beam_size = beam_size
        self.seed = seed

    def _configs(self):
        model = ModelConfig(self.embed_dim, self.hidden_dim, self.max_source_len, self.max_target_len)
        tc = TrainConfig(
            learning_rate=self.learning_rate,
            steps=self.steps,
            batch_size=self.batch_size,
            seed=self.seed,
            clip_norm=self.clip_norm,
            log_every=self.log_every,
        )
        return model, tc

    def fit(self, X, y):
        X, y = _check_text_pairs(X, y)
        pairs = list(zip(X, y))
        model_config, train_config = self._configs()
        self.vocab_ = build_vocab(pairs, self.min_frequency, self.max_vocab_size)
        result = train(pairs, self.vocab_, model_config, train_config)
        self.checkpoint_ = result.checkpoint
        self.loss_trace_ = result.loss_trace
        return self

    @classmethod
    def from_checkpoint(cls, checkpoint, **kwargs) -> "BiLSTMTranslator":
        if not isinstance(checkpoint, Checkpoint):
            checkpoint = Checkpoint.load(checkpoint)
        c = checkpoint.config
        est = cls(
            embed_dim=c.embed_dim,
            hidden_dim=c.hidden_dim,
            max_source_len=c.max_source_len,
            max_target_len=c.max_target_len,
            **kwargs,
        )
        est.checkpoint_ = checkpoint
        est.vocab_ = checkpoint.vocab
        est.loss_trace_ = []
        return est

    def translate(self, X, max_len=None):
        """Full :class:`~healthlit.nmt.decoding.Translation` objects."""
        check_is_fitted(self, "checkpoint_")
        return [translate(self.checkpoint_, x, self.decode, self.beam_size, max_len) for x in X]

    def predict(self, X):
        return [t.sentence.raw for t in self.translate(X)]

    def score(self, X, y):
        """Corpus BLEU of the predictions against ``y``."""
        from ..evaluation import corpus_bleu

        return corpus_bleu(self.predict(X), list(y)).score
