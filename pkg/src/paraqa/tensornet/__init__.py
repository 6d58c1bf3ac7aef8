"""Minimal neural-network substrate: tensors with reverse-mode gradients,
embedding lookup, LSTM encoders, dropout, RMSProp, and parameter storage."""

from . import tensor as ag  # noqa: F401
from .layers import LstmParams, bilstm_encode, dropout, embed, lstm_step  # noqa: F401
from .optim import clip_grad_norm, init_uniform, rmsprop_update  # noqa: F401
from .store import BOS, EOS, UNK, ParamStore, RngHub, Vocab, load_embedding_file  # noqa: F401
from .tensor import Tensor, backward, no_grad  # noqa: F401
