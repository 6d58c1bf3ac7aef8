"""Named trainable parameters, vocabulary, seeded RNG streams, checkpoints.

Checkpoints are a versioned text dump: one header line per parameter
(name, trainable flag, shape) followed by rows of ``float.hex`` values,
which round-trips float64 bit-exactly and keeps repeated runs of the same
seed byte-identical on disk.
"""

from __future__ import annotations

import numpy as np

from ..errors import CheckpointError, InvalidArgumentError
from .tensor import Tensor

BOS = "<s>"
EOS = "</s>"
UNK = "<unk>"

_CKPT_MAGIC = "paraqa-params v1"


class ParamStore:
    """Map of name -> parameter tensor, with RMSProp accumulator state."""

    def __init__(self):
        self._params: dict[str, Tensor] = {}
        self.accum: dict[str, np.ndarray] = {}

    def add(self, name: str, values, trainable: bool = True) -> Tensor:
        if name in self._params:
            raise InvalidArgumentError(f"duplicate parameter name: {name}")
        arr = np.array(values, dtype=np.float64)
        if arr.ndim == 0:
            arr = arr.reshape(1)
        t = Tensor(arr, requires_grad=trainable)
        self._params[name] = t
        self.accum[name] = np.zeros_like(t.data)
        return t

    def __getitem__(self, name: str) -> Tensor:
        return self._params[name]

    def __contains__(self, name: str) -> bool:
        return name in self._params

    def names(self) -> list[str]:
        return sorted(self._params)

    def trainable_names(self) -> list[str]:
        return [n for n in self.names() if self._params[n].requires_grad]

    def zero_grad(self):
        for t in self._params.values():
            t.grad = None

    def grads(self) -> dict[str, np.ndarray]:
        """Gradients of trainable parameters after a backward sweep."""
        out = {}
        for name in self.trainable_names():
            t = self._params[name]
            out[name] = t.grad if t.grad is not None else np.zeros_like(t.data)
        return out

    def snapshot(self) -> dict[str, np.ndarray]:
        return {n: t.data.copy() for n, t in self._params.items()}

    def restore(self, snap: dict[str, np.ndarray]):
        for name, values in snap.items():
            self._params[name].data = values.copy()

    # -- persistence --------------------------------------------------------

    def save(self, path):
        lines = [_CKPT_MAGIC]
        for name in self.names():
            t = self._params[name]
            shape = ",".join(str(s) for s in t.data.shape)
            lines.append(f"param\t{name}\t{int(t.requires_grad)}\t{shape}")
            rows = t.data if t.data.ndim > 1 else t.data[None, :]
            for row in rows:
                lines.append(" ".join(float(v).hex() for v in row))
        with open(path, "w", encoding="utf-8") as f:
            f.write("\n".join(lines) + "\n")

    @classmethod
    def load(cls, path) -> "ParamStore":
        store = cls()
        with open(path, encoding="utf-8") as f:
            lines = f.read().splitlines()
        if not lines or lines[0] != _CKPT_MAGIC:
            raise CheckpointError(f"{path}: not a parameter checkpoint")
        i = 1
        while i < len(lines):
            head = lines[i].split("\t")
            if head[0] != "param" or len(head) != 4:
                raise CheckpointError(f"{path}: malformed header at line {i + 1}")
            name, trainable, shape_s = head[1], bool(int(head[2])), head[3]
            shape = tuple(int(s) for s in shape_s.split(","))
            nrows = shape[0] if len(shape) > 1 else 1
            rows = []
            for _ in range(nrows):
                i += 1
                rows.append([float.fromhex(v) for v in lines[i].split()])
            values = np.array(rows, dtype=np.float64).reshape(shape)
            store.add(name, values, trainable=trainable)
            i += 1
        return store


# ---------------------------------------------------------------------------
# vocabulary and pretrained embeddings
# ---------------------------------------------------------------------------


class Vocab:
    """Token -> index map with start/end/unknown symbols.

    Indices below ``pretrained_count`` address the frozen pretrained bank;
    the rest address the trainable bank (special symbols always live
    there, so their vectors update during training while the pretrained
    matrix stays bitwise unchanged).
    """

    def __init__(self, pretrained_words=(), learned_words=()):
        self.pretrained = list(pretrained_words)
        specials = [BOS, EOS, UNK]
        taken = set(self.pretrained) | set(specials)
        self.learned = specials + [w for w in learned_words if w not in taken]
        self._index = {w: i for i, w in enumerate(self.pretrained)}
        base = len(self.pretrained)
        for j, w in enumerate(self.learned):
            self._index[w] = base + j

    @property
    def pretrained_count(self) -> int:
        return len(self.pretrained)

    def __len__(self):
        return len(self.pretrained) + len(self.learned)

    def index(self, token: str) -> int:
        return self._index.get(token, self._index[UNK])

    def wrap_indices(self, tokens) -> list[int]:
        """Indices for a sequence wrapped with start/end symbols."""
        return (
            [self._index[BOS]]
            + [self.index(t) for t in tokens]
            + [self._index[EOS]]
        )

    @classmethod
    def build(cls, token_iterables) -> "Vocab":
        seen = set()
        for toks in token_iterables:
            seen.update(toks)
        return cls(pretrained_words=(), learned_words=sorted(seen))

    def save(self, path):
        with open(path, "w", encoding="utf-8") as f:
            f.write("paraqa-vocab v1\n")
            f.write(f"pretrained {len(self.pretrained)}\n")
            for w in self.pretrained:
                f.write(w + "\n")
            f.write(f"learned {len(self.learned)}\n")
            for w in self.learned:
                f.write(w + "\n")

    @classmethod
    def load(cls, path) -> "Vocab":
        with open(path, encoding="utf-8") as f:
            lines = f.read().splitlines()
        if not lines or lines[0] != "paraqa-vocab v1":
            raise CheckpointError(f"{path}: not a vocab file")
        i = 1
        n_pre = int(lines[i].split()[1])
        pretrained = lines[i + 1:i + 1 + n_pre]
        i += 1 + n_pre
        n_learned = int(lines[i].split()[1])
        learned = lines[i + 1:i + 1 + n_learned]
        vocab = cls(pretrained_words=pretrained,
                    learned_words=[w for w in learned if w not in (BOS, EOS, UNK)])
        if vocab.learned != learned:
            raise CheckpointError(f"{path}: learned-word order mismatch")
        return vocab


def load_embedding_file(path):
    """Read the standard text layout: ``word v1 v2 ... vd`` per line."""
    words = []
    vectors = []
    dim = None
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            parts = line.rstrip("\n").split(" ")
            if len(parts) < 2:
                continue
            word, vals = parts[0], parts[1:]
            if dim is None:
                dim = len(vals)
            elif len(vals) != dim:
                raise InvalidArgumentError(
                    f"{path}:{lineno}: expected {dim} values, got {len(vals)}"
                )
            words.append(word)
            vectors.append([float(v) for v in vals])
    if not words:
        raise InvalidArgumentError(f"{path}: no embedding rows")
    return words, np.array(vectors, dtype=np.float64)


# ---------------------------------------------------------------------------
# seeded randomness
# ---------------------------------------------------------------------------

_STREAMS = ("init", "dropout", "shuffle", "data")


class RngHub:
    """Named RNG sub-streams derived from one experiment seed."""

    def __init__(self, seed: int):
        self.seed = int(seed)
        self._rngs = {
            name: np.random.default_rng([self.seed, k])
            for k, name in enumerate(_STREAMS)
        }

    def stream(self, name: str) -> np.random.Generator:
        return self._rngs[name]
