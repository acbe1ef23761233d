"""Input assembly and the feedforward sense classifier.

A RelationModel concatenates the enabled per-argument blocks in a fixed
order -- [arg1 bilstm ; arg2 bilstm ; arg1 pretrained ; arg2 pretrained ;
word-pair block] -- and scores senses with a stack of affine layers
(ReLU and dropout between them, raw logits out). Checkpoints are
deterministic zip containers so identical runs produce identical bytes.
"""

from __future__ import annotations

import io
import json
import zipfile
from dataclasses import dataclass

import numpy as np

from .corpus import RelationInstance, SenseInventory
from .encoder import BiLstmEncoder, EmbeddingTable
from .errors import FormatError, ShapeError
from .features import BrownClusterMap, word_pair_features
from .nn import (Tensor, affine_backward, affine_forward, dropout_backward,
                 dropout_forward, make_rng, relu_backward, relu_forward,
                 xavier_init)
from .vectors import NgramTable, SentenceVectorStore, sent2vec_compose

Array = np.ndarray

ALLOWED_HEAD_LAYERS = (2, 3, 4, 5, 7, 10)
DEFAULT_WIDTH_CAP = 512
CHECKPOINT_VERSION = 1


@dataclass
class InputPlan:
    """Which representation blocks feed the classifier, with their sizes."""

    use_bilstm: bool = False
    use_pretrained: bool = False
    use_wordpairs: bool = False
    pooling: str = "concat"
    bilstm_dim: int = 0       # per-argument encoder output (2 * hidden)
    pretrained_dim: int = 0   # per-argument pretrained vector size
    wordpair_dim: int = 0

    def __post_init__(self):
        if not (self.use_bilstm or self.use_pretrained or self.use_wordpairs):
            raise ValueError("at least one input source must be enabled")
        if self.use_bilstm and self.bilstm_dim < 1:
            raise ValueError("bilstm_dim must be positive when the encoder is enabled")
        if self.use_pretrained and self.pretrained_dim < 1:
            raise ValueError("pretrained_dim must be positive when enabled")
        if self.use_wordpairs and self.wordpair_dim < 1:
            raise ValueError("wordpair_dim must be positive when enabled")

    @property
    def input_dimension(self) -> int:
        total = 0
        if self.use_bilstm:
            total += 2 * self.bilstm_dim
        if self.use_pretrained:
            total += 2 * self.pretrained_dim
        if self.use_wordpairs:
            total += self.wordpair_dim
        return total

    def kind(self) -> str:
        if self.use_bilstm and self.use_pretrained:
            return "combined"
        return "bilstm" if self.use_bilstm else "pretrained"


def default_head_layers(plan: InputPlan) -> int:
    """3 layers for the end-to-end encoder, 4 for pretrained and combined."""
    return 3 if plan.use_bilstm and not plan.use_pretrained else 4


class FfnHead:
    """Affine stack with ReLU and dropout between layers, logits out."""

    def __init__(self, input_dim: int, output_dim: int, layer_count: int,
                 rng: np.random.Generator, hidden_width: int | None = None,
                 dtype=np.float32):
        if layer_count not in ALLOWED_HEAD_LAYERS:
            raise ValueError(
                f"layer count must be one of {ALLOWED_HEAD_LAYERS}, got {layer_count}")
        if input_dim < 1 or output_dim < 1:
            raise ValueError("input and output dimensions must be positive")
        self.input_dim = input_dim
        self.output_dim = output_dim
        self.layer_count = layer_count
        self.hidden_width = hidden_width or min(input_dim, DEFAULT_WIDTH_CAP)
        self.dtype = np.dtype(dtype)
        dims = [input_dim] + [self.hidden_width] * (layer_count - 1) + [output_dim]
        self.layers: list[tuple[Tensor, Tensor]] = []
        for k in range(layer_count):
            w = Tensor(xavier_init(dims[k], dims[k + 1], rng, dtype), name=f"head.{k}.W")
            b = Tensor(np.zeros(dims[k + 1], dtype=dtype), name=f"head.{k}.b")
            self.layers.append((w, b))

    def parameters(self) -> list[Tensor]:
        return [t for pair in self.layers for t in pair]

    def forward(self, x: Array, training: bool = False, dropout: float = 0.0,
                rng: np.random.Generator | None = None):
        caches = []
        h = x
        last = self.layer_count - 1
        for k, (w, b) in enumerate(self.layers):
            h, aff = affine_forward(h, w.data, b.data)
            if k < last:
                h, mask = relu_forward(h)
                h, drop = dropout_forward(h, dropout, rng, training)
            else:
                mask = drop = None
            caches.append((aff, mask, drop))
        return h, caches

    def backward(self, dlogits: Array, caches) -> Array:
        """Accumulate parameter gradients; returns the input gradient."""
        d = dlogits
        last = self.layer_count - 1
        for k in reversed(range(self.layer_count)):
            aff, mask, drop = caches[k]
            if k < last:
                d = dropout_backward(d, drop)
                d = relu_backward(d, mask)
            d, dw, db = affine_backward(d, aff)
            w, b = self.layers[k]
            w.grad += dw
            b.grad += db
        return d


class RelationModel:
    """Input plan + optional encoder/stores + FFN head + sense inventory."""

    def __init__(self, plan: InputPlan, inventory: SenseInventory, head: FfnHead,
                 encoder: BiLstmEncoder | None = None,
                 store: SentenceVectorStore | None = None,
                 ngrams: NgramTable | None = None,
                 clusters: BrownClusterMap | None = None,
                 dropout: float = 0.35, freeze_encoder: bool = False):
        if plan.use_bilstm:
            if encoder is None:
                raise ValueError("plan enables the encoder but none was given")
            if encoder.output_dim != plan.bilstm_dim:
                raise ShapeError(
                    f"encoder output {encoder.output_dim} != plan bilstm_dim {plan.bilstm_dim}")
            if encoder.pooling != plan.pooling:
                raise ValueError(
                    f"encoder pooling {encoder.pooling!r} != plan pooling {plan.pooling!r}")
        if plan.use_pretrained:
            if (store is None) == (ngrams is None):
                raise ValueError(
                    "plan enables pretrained vectors: give exactly one of store/ngrams")
            source_dim = store.dimension if store is not None else ngrams.dimension
            if source_dim != plan.pretrained_dim:
                raise ShapeError(
                    f"pretrained source dimension {source_dim} != plan {plan.pretrained_dim}")
        if plan.use_wordpairs and clusters is None:
            raise ValueError("plan enables word pairs but no cluster map was given")
        if head.input_dim != plan.input_dimension:
            raise ShapeError(
                f"head input {head.input_dim} != plan input {plan.input_dimension}")
        if head.output_dim != len(inventory):
            raise ShapeError(
                f"head output {head.output_dim} != {len(inventory)} senses")
        if not 0.0 <= dropout < 1.0:
            raise ValueError(f"dropout must be in [0, 1), got {dropout}")
        self.plan = plan
        self.inventory = inventory
        self.head = head
        self.encoder = encoder
        self.store = store
        self.ngrams = ngrams
        self.clusters = clusters
        self.dropout = dropout
        self.freeze_encoder = freeze_encoder

    @classmethod
    def build(cls, plan: InputPlan, inventory: SenseInventory,
              rng: np.random.Generator, encoder: BiLstmEncoder | None = None,
              store: SentenceVectorStore | None = None,
              ngrams: NgramTable | None = None,
              clusters: BrownClusterMap | None = None,
              head_layers: int | None = None, hidden_width: int | None = None,
              dropout: float = 0.35, freeze_encoder: bool = False,
              dtype=np.float32) -> "RelationModel":
        layers = head_layers if head_layers is not None else default_head_layers(plan)
        head = FfnHead(plan.input_dimension, len(inventory), layers, rng,
                       hidden_width, dtype)
        return cls(plan, inventory, head, encoder, store, ngrams, clusters,
                   dropout, freeze_encoder)

    def parameters(self) -> list[Tensor]:
        """Trainable parameters (a frozen encoder is excluded)."""
        params = list(self.head.parameters())
        if self.encoder is not None and not self.freeze_encoder:
            params.extend(self.encoder.parameters())
        return params

    def all_parameters(self) -> list[Tensor]:
        params = list(self.head.parameters())
        if self.encoder is not None:
            params.extend(self.encoder.parameters())
        return params

    def _pretrained_vector(self, instance: RelationInstance, slot: str) -> Array:
        if self.store is not None:
            return self.store.lookup(f"{instance.id}#{slot}")
        tokens = instance.arg1_tokens if slot == "arg1" else instance.arg2_tokens
        return sent2vec_compose(tokens, self.ngrams).values

    def build_input(self, instance: RelationInstance):
        """Concatenated input vector plus the encoder caches (if any)."""
        dtype = self.head.dtype
        blocks: list[Array] = []
        enc_caches = None
        if self.plan.use_bilstm:
            rep1, c1 = self.encoder.encode(instance.arg1_tokens)
            rep2, c2 = self.encoder.encode(instance.arg2_tokens)
            blocks.extend((rep1.values, rep2.values))
            enc_caches = (c1, c2)
        if self.plan.use_pretrained:
            blocks.append(np.asarray(
                self._pretrained_vector(instance, "arg1"), dtype=dtype))
            blocks.append(np.asarray(
                self._pretrained_vector(instance, "arg2"), dtype=dtype))
        if self.plan.use_wordpairs:
            sparse = word_pair_features(
                instance.arg1_tokens, instance.arg2_tokens,
                self.clusters, self.plan.wordpair_dim)
            blocks.append(sparse.to_dense(dtype))
        x = np.concatenate(blocks)
        if x.shape[0] != self.plan.input_dimension:
            raise ShapeError(
                f"assembled input has length {x.shape[0]}, "
                f"plan says {self.plan.input_dimension}")
        return x, enc_caches

    def forward(self, instance: RelationInstance, training: bool = False,
                rng: np.random.Generator | None = None):
        x, enc_caches = self.build_input(instance)
        rate = self.dropout if training else 0.0
        logits, head_cache = self.head.forward(x, training, rate, rng)
        return logits, (enc_caches, head_cache)

    def backward(self, dlogits: Array, cache) -> None:
        enc_caches, head_cache = cache
        dx = self.head.backward(dlogits, head_cache)
        if self.plan.use_bilstm and not self.freeze_encoder:
            width = self.plan.bilstm_dim
            c1, c2 = enc_caches
            self.encoder.backward(dx[:width], c1)
            self.encoder.backward(dx[width:2 * width], c2)

    def predict_index(self, instance: RelationInstance) -> int:
        logits, _ = self.forward(instance, training=False)
        # np.argmax takes the first maximum: ties break to the lowest index
        return int(np.argmax(logits))

    def predict(self, instance: RelationInstance) -> str:
        return self.inventory.label(self.predict_index(instance))


def _model_config(model: RelationModel, resources: dict[str, str] | None) -> dict:
    plan = model.plan
    config = {
        "format_version": CHECKPOINT_VERSION,
        "plan": {
            "use_bilstm": plan.use_bilstm,
            "use_pretrained": plan.use_pretrained,
            "use_wordpairs": plan.use_wordpairs,
            "pooling": plan.pooling,
            "bilstm_dim": plan.bilstm_dim,
            "pretrained_dim": plan.pretrained_dim,
            "wordpair_dim": plan.wordpair_dim,
        },
        "senses": list(model.inventory.labels),
        "head": {
            "layer_count": model.head.layer_count,
            "hidden_width": model.head.hidden_width,
        },
        "dropout": model.dropout,
        "freeze_encoder": model.freeze_encoder,
        "dtype": model.head.dtype.name,
        "pretrained_source": (
            "store" if model.store is not None
            else "ngrams" if model.ngrams is not None else None),
        "resources": resources or {},
    }
    if model.encoder is not None:
        config["encoder"] = {
            "hidden_dim": model.encoder.hidden_dim,
            "num_layers": model.encoder.num_layers,
            "embedding_dim": model.encoder.table.dimension,
        }
    else:
        config["encoder"] = None
    return config


def save_checkpoint(model: RelationModel, path,
                    resources: dict[str, str] | None = None) -> None:
    """Write a self-describing checkpoint with deterministic bytes.

    The container is an uncompressed zip with fixed timestamps: identical
    models always serialize to identical files.
    """
    config = _model_config(model, resources)
    with zipfile.ZipFile(path, "w", compression=zipfile.ZIP_STORED) as zf:
        def write(name: str, payload: bytes) -> None:
            info = zipfile.ZipInfo(name, date_time=(1980, 1, 1, 0, 0, 0))
            zf.writestr(info, payload)

        write("config.json", json.dumps(config, sort_keys=True).encode("utf-8"))
        for tensor in model.all_parameters():
            buf = io.BytesIO()
            np.save(buf, tensor.data)
            write(f"params/{tensor.name}.npy", buf.getvalue())


def read_checkpoint_config(path) -> dict:
    """Read only the config block (e.g. to locate resource files)."""
    with zipfile.ZipFile(path) as zf:
        config = json.loads(zf.read("config.json"))
    if config.get("format_version") != CHECKPOINT_VERSION:
        raise FormatError(
            f"unsupported checkpoint version {config.get('format_version')!r}")
    return config


def load_checkpoint(path, table: EmbeddingTable | None = None,
                    store: SentenceVectorStore | None = None,
                    ngrams: NgramTable | None = None,
                    clusters: BrownClusterMap | None = None) -> RelationModel:
    """Rebuild a RelationModel from a checkpoint; external resources
    (embedding table, vector store, cluster map) are re-injected by the
    caller."""
    with zipfile.ZipFile(path) as zf:
        config = json.loads(zf.read("config.json"))
        if config.get("format_version") != CHECKPOINT_VERSION:
            raise FormatError(
                f"unsupported checkpoint version {config.get('format_version')!r}")
        plan = InputPlan(**config["plan"])
        inventory = SenseInventory(config["senses"])
        dtype = np.dtype(config["dtype"])
        rng = make_rng(0)  # placeholder values, overwritten below
        encoder = None
        if config["encoder"] is not None:
            if table is None:
                raise ValueError("checkpoint uses an encoder: an embedding table is required")
            enc_cfg = config["encoder"]
            if table.dimension != enc_cfg["embedding_dim"]:
                raise ShapeError(
                    f"embedding table dimension {table.dimension} != "
                    f"checkpoint {enc_cfg['embedding_dim']}")
            encoder = BiLstmEncoder(table, enc_cfg["hidden_dim"], rng,
                                    enc_cfg["num_layers"], plan.pooling, dtype=dtype)
        head = FfnHead(plan.input_dimension, len(inventory),
                       config["head"]["layer_count"], rng,
                       config["head"]["hidden_width"], dtype)
        model = RelationModel(plan, inventory, head, encoder, store, ngrams,
                              clusters, config["dropout"], config["freeze_encoder"])
        for tensor in model.all_parameters():
            payload = zf.read(f"params/{tensor.name}.npy")
            loaded = np.load(io.BytesIO(payload))
            if loaded.shape != tensor.data.shape:
                raise ShapeError(
                    f"checkpoint tensor {tensor.name} has shape {loaded.shape}, "
                    f"model expects {tensor.data.shape}")
            tensor.data[...] = loaded
    return model
