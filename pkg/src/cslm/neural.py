"""Word-level LSTM language model with tied input/output embeddings.

Everything is plain float64 numpy: forward recurrence, full backpropagation
through the truncated window, SGD with global-norm clipping, ancestral
sampling.  Tying the softmax projection to the embedding matrix requires
embed_dim == hidden_dim.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import Corpus, Lang, TaggedToken, Utterance, Vocabulary
from .corpus import split_corpus

_LOG10 = math.log(10.0)

_CHECKPOINT_MAGIC = b"CSLMNN\n"
_CHECKPOINT_VERSION = 1


class NeuralLMError(ValueError):
    """Invalid model configuration or inputs."""


class NumericalError(RuntimeError):
    """Training produced a non-finite value."""


class SamplingError(RuntimeError):
    """The sampler could not produce a terminated utterance."""


def _sigmoid(x):
    # tanh form avoids overflow warnings for large negative inputs
    return 0.5 * (np.tanh(0.5 * x) + 1.0)


@dataclass
class LayerParams:
    w: np.ndarray  # (4H, in_dim + H), gate rows ordered i, f, g, o
    b: np.ndarray  # (4H,)


@dataclass
class NeuralLMParams:
    vocab_size: int
    embed_dim: int
    hidden_dim: int
    num_layers: int
    embedding: np.ndarray  # (V, E); also the transposed softmax projection
    layers: list[LayerParams]
    out_bias: np.ndarray  # (V,)

    def tensors(self) -> list[tuple[str, np.ndarray]]:
        named = [("embedding", self.embedding)]
        for idx, layer in enumerate(self.layers):
            named.append((f"layer{idx}.w", layer.w))
            named.append((f"layer{idx}.b", layer.b))
        named.append(("out_bias", self.out_bias))
        return named

    def copy(self) -> "NeuralLMParams":
        return NeuralLMParams(
            self.vocab_size,
            self.embed_dim,
            self.hidden_dim,
            self.num_layers,
            self.embedding.copy(),
            [LayerParams(l.w.copy(), l.b.copy()) for l in self.layers],
            self.out_bias.copy(),
        )

    def param_count(self) -> int:
        return sum(arr.size for _, arr in self.tensors())

    def all_finite(self) -> bool:
        return all(np.all(np.isfinite(arr)) for _, arr in self.tensors())


@dataclass
class TrainConfig:
    bptt_len: int = 35
    batch_size: int = 20
    learning_rate: float = 1.0
    lr_decay: float = 0.5
    grad_clip_norm: float = 5.0
    epochs: int = 5
    seed: int = 0
    dropout_keep: float = 1.0

    def __post_init__(self):
        if self.bptt_len < 1 or self.batch_size < 1 or self.epochs < 0:
            raise NeuralLMError("bptt_len, batch_size must be >= 1 and epochs >= 0")
        if self.learning_rate < 0:
            raise NeuralLMError("learning_rate must be >= 0")
        if not 0.0 < self.lr_decay <= 1.0:
            raise NeuralLMError("lr_decay must be in (0, 1]")
        if self.grad_clip_norm <= 0:
            raise NeuralLMError("grad_clip_norm must be positive")
        if not 0.0 < self.dropout_keep <= 1.0:
            raise NeuralLMError("dropout_keep must be in (0, 1]")


@dataclass
class SampleConfig:
    temperature: float = 1.0
    max_tokens: int = 1000
    seed: int = 0
    forbid_unk: bool = True
    greedy: bool = False  # argmax decoding, the temperature->0 limit

    def __post_init__(self):
        if self.temperature <= 0:
            raise NeuralLMError("temperature must be positive")
        if self.max_tokens < 1:
            raise NeuralLMError("max_tokens must be >= 1")


@dataclass
class EpochStats:
    epoch: int
    train_ppl: float
    valid_ppl: float
    learning_rate: float


@dataclass
class TrainResult:
    params: NeuralLMParams
    trace: list[EpochStats]


@dataclass
class ScoreResult:
    logprob_sum: float  # log10
    ppl: float
    token_count: int  # scored events: words plus one eos per utterance
    word_count: int
    oov_count: int

    @property
    def oov_rate(self) -> float:
        return self.oov_count / self.word_count if self.word_count else 0.0


def init_params(
    vocab_size: int, embed_dim: int, hidden_dim: int, num_layers: int, seed: int
) -> NeuralLMParams:
    """Uniform [-0.1, 0.1] initialization; forget-gate biases start at 1.0."""
    if min(vocab_size, embed_dim, hidden_dim, num_layers) < 1:
        raise NeuralLMError("all dimensions must be >= 1")
    if embed_dim != hidden_dim:
        raise NeuralLMError(
            f"tied embeddings require embed_dim == hidden_dim, got {embed_dim} != {hidden_dim}"
        )
    rng = np.random.default_rng(seed)
    h = hidden_dim

    def uniform(*shape):
        return rng.uniform(-0.1, 0.1, size=shape)

    embedding = uniform(vocab_size, embed_dim)
    layers = []
    for idx in range(num_layers):
        in_dim = embed_dim if idx == 0 else hidden_dim
        w = uniform(4 * h, in_dim + h)
        b = uniform(4 * h)
        b[h : 2 * h] = 1.0
        layers.append(LayerParams(w, b))
    out_bias = uniform(vocab_size)
    return NeuralLMParams(vocab_size, embed_dim, hidden_dim, num_layers, embedding, layers, out_bias)


def zero_state(params: NeuralLMParams, batch_size: int = 1) -> list[tuple[np.ndarray, np.ndarray]]:
    h = params.hidden_dim
    return [
        (np.zeros((batch_size, h)), np.zeros((batch_size, h)))
        for _ in range(params.num_layers)
    ]


def _check_ids(params: NeuralLMParams, ids: np.ndarray) -> None:
    if ids.size and (ids.min() < 0 or ids.max() >= params.vocab_size):
        raise NeuralLMError(
            f"token id out of range [0, {params.vocab_size}): {int(ids.min())}..{int(ids.max())}"
        )


def _step(params, layer_idx, x, h_prev, c_prev, cache=None):
    """One LSTM cell step for a (B, in_dim) input slice."""
    hsz = params.hidden_dim
    layer = params.layers[layer_idx]
    z = np.concatenate([x, h_prev], axis=1)
    a = z @ layer.w.T + layer.b
    i = _sigmoid(a[:, :hsz])
    f = _sigmoid(a[:, hsz : 2 * hsz])
    g = np.tanh(a[:, 2 * hsz : 3 * hsz])
    o = _sigmoid(a[:, 3 * hsz :])
    c = f * c_prev + i * g
    hc = np.tanh(c)
    h = o * hc
    if cache is not None:
        cache.append((z, i, f, g, o, c_prev, hc))
    return h, c


def _run_forward(params, ids, state, masks=None, collect_cache=False):
    """ids: (B, T). Returns (hidden (B,T,H), state, caches, dropped_inputs)."""
    batch, steps = ids.shape
    state = [(h.copy(), c.copy()) for h, c in state]
    caches = [[] for _ in range(params.num_layers)] if collect_cache else None
    top = np.empty((batch, steps, params.hidden_dim))
    emb_in = params.embedding[ids]  # (B, T, E)
    if masks is not None:
        emb_in = emb_in * masks["in0"]
    layer_inputs = [emb_in] if collect_cache else None
    x_all = emb_in
    for layer_idx in range(params.num_layers):
        if layer_idx > 0:
            if masks is not None:
                x_all = x_all * masks[f"in{layer_idx}"]
            if collect_cache:
                layer_inputs.append(x_all)
        h, c = state[layer_idx]
        outs = np.empty((batch, steps, params.hidden_dim))
        cache = caches[layer_idx] if collect_cache else None
        for t in range(steps):
            h, c = _step(params, layer_idx, x_all[:, t], h, c, cache)
            outs[:, t] = h
        state[layer_idx] = (h, c)
        x_all = outs
    top[...] = x_all
    return top, state, caches, layer_inputs


def forward(params: NeuralLMParams, token_ids, state=None):
    """Logits for each position of a single id sequence.

    Returns (logits with shape (len, vocab), final_state).  An empty sequence
    yields empty logits and passes the state through.
    """
    ids = np.asarray(token_ids, dtype=np.int64).reshape(1, -1)
    _check_ids(params, ids)
    if state is None:
        state = zero_state(params, 1)
    if ids.shape[1] == 0:
        return np.zeros((0, params.vocab_size)), state
    top, state, _, _ = _run_forward(params, ids, state)
    logits = top[0] @ params.embedding.T + params.out_bias
    return logits, state


def _log_softmax(logits):
    shifted = logits - logits.max(axis=-1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


def _make_masks(params, rng, batch, steps, keep):
    masks = {"in0": (rng.random((batch, steps, params.embed_dim)) < keep) / keep}
    for layer_idx in range(1, params.num_layers):
        masks[f"in{layer_idx}"] = (rng.random((batch, steps, params.hidden_dim)) < keep) / keep
    masks["out"] = (rng.random((batch, steps, params.hidden_dim)) < keep) / keep
    return masks


def loss_and_grads(
    params: NeuralLMParams,
    input_ids,
    target_ids,
    state=None,
    dropout_keep: float = 1.0,
    rng: np.random.Generator | None = None,
):
    """Mean cross-entropy (natural log) and gradients for every parameter.

    input_ids/target_ids may be 1-D (one sequence) or 2-D (batch, time);
    targets are the inputs shifted by one.  The tied embedding accumulates
    both its input-lookup and output-projection gradients.
    """
    inputs = np.asarray(input_ids, dtype=np.int64)
    targets = np.asarray(target_ids, dtype=np.int64)
    if inputs.ndim == 1:
        inputs = inputs.reshape(1, -1)
        targets = np.asarray(target_ids, dtype=np.int64).reshape(1, -1)
    if inputs.shape != targets.shape:
        raise NeuralLMError(f"input/target shape mismatch: {inputs.shape} vs {targets.shape}")
    if inputs.size == 0:
        raise NeuralLMError("cannot compute a loss over an empty window")
    _check_ids(params, inputs)
    _check_ids(params, targets)
    batch, steps = inputs.shape
    hsz = params.hidden_dim
    if state is None:
        state = zero_state(params, batch)

    masks = None
    if dropout_keep < 1.0:
        if rng is None:
            raise NeuralLMError("dropout requires a random generator")
        masks = _make_masks(params, rng, batch, steps, dropout_keep)

    top, final_state, caches, layer_inputs = _run_forward(
        params, inputs, state, masks, collect_cache=True
    )
    head_in = top * masks["out"] if masks is not None else top
    logits = head_in @ params.embedding.T + params.out_bias
    logp = _log_softmax(logits)
    n_pos = batch * steps
    rows = np.arange(batch)[:, None]
    cols = np.arange(steps)[None, :]
    loss = -logp[rows, cols, targets].mean()

    # Backward through the softmax head.
    d_logits = np.exp(logp)
    d_logits[rows, cols, targets] -= 1.0
    d_logits /= n_pos
    flat_dlogits = d_logits.reshape(n_pos, -1)
    flat_head = head_in.reshape(n_pos, hsz)
    grads = {name: np.zeros_like(arr) for name, arr in params.tensors()}
    grads["out_bias"] += flat_dlogits.sum(axis=0)
    grads["embedding"] += flat_dlogits.T @ flat_head
    d_top = (d_logits @ params.embedding).reshape(batch, steps, hsz)
    if masks is not None:
        d_top = d_top * masks["out"]

    # Backward through the stacked recurrence, top layer first.
    d_above = d_top
    for layer_idx in range(params.num_layers - 1, -1, -1):
        layer = params.layers[layer_idx]
        in_dim = params.embed_dim if layer_idx == 0 else hsz
        cache = caches[layer_idx]
        dw = grads[f"layer{layer_idx}.w"]
        db = grads[f"layer{layer_idx}.b"]
        d_inputs = np.empty((batch, steps, in_dim))
        dh_next = np.zeros((batch, hsz))
        dc_next = np.zeros((batch, hsz))
        for t in range(steps - 1, -1, -1):
            z, i, f, g, o, c_prev, hc = cache[t]
            dh = d_above[:, t] + dh_next
            do = dh * hc
            dc = dc_next + dh * o * (1.0 - hc * hc)
            da = np.concatenate(
                [
                    dc * g * i * (1.0 - i),
                    dc * c_prev * f * (1.0 - f),
                    dc * i * (1.0 - g * g),
                    do * o * (1.0 - o),
                ],
                axis=1,
            )
            dw += da.T @ z
            db += da.sum(axis=0)
            dz = da @ layer.w
            d_inputs[:, t] = dz[:, :in_dim]
            dh_next = dz[:, in_dim:]
            dc_next = dc * f
        if masks is not None:
            d_inputs = d_inputs * masks[f"in{layer_idx}"]
        d_above = d_inputs
    # d_above now holds gradients w.r.t. the embedding lookups.
    flat_ids = inputs.reshape(-1)
    np.add.at(grads["embedding"], flat_ids, d_above.reshape(-1, params.embed_dim))
    return float(loss), grads, final_state


def _global_norm(grads) -> float:
    return math.sqrt(sum(float(np.sum(g * g)) for g in grads.values()))


def _sgd_step(params, grads, lr, clip):
    norm = _global_norm(grads)
    scale = lr if norm <= clip else lr * clip / norm
    for name, arr in params.tensors():
        arr -= scale * grads[name]
    return norm


def _token_stream(corpus: Corpus, vocab: Vocabulary) -> list[int]:
    stream: list[int] = []
    for utt in corpus:
        stream.append(vocab.bos_id)
        stream.extend(vocab.id_or_unk(t.surface) for t in utt.tokens)
        stream.append(vocab.eos_id)
    return stream


def train(
    params: NeuralLMParams,
    corpus: Corpus,
    vocab: Vocabulary,
    config: TrainConfig,
    valid_corpus: Corpus | None = None,
) -> TrainResult:
    """SGD over a bos/eos-delimited token stream, truncated-BPTT windows.

    The learning rate is multiplied by lr_decay whenever the validation
    perplexity fails to improve.  When no validation corpus is given, a
    deterministic 10% split of the training corpus is carved out.
    """
    if len(corpus) == 0:
        raise NeuralLMError("cannot train on an empty corpus")
    if valid_corpus is None:
        corpus, valid_corpus = split_corpus(corpus, [0.9, 0.1], config.seed)
        if len(corpus) == 0 or len(valid_corpus) == 0:
            raise NeuralLMError("corpus too small to carve a validation split")
    params = params.copy()
    rng = np.random.default_rng(config.seed)
    stream = _token_stream(corpus, vocab)
    batch = max(1, min(config.batch_size, len(stream) // 2))
    length = len(stream) // batch
    if length < 2:
        raise NeuralLMError("corpus too small for the requested batch size")
    data = np.asarray(stream[: batch * length], dtype=np.int64).reshape(batch, length)
    bptt = min(config.bptt_len, length - 1)

    lr = config.learning_rate
    best_valid = math.inf
    trace: list[EpochStats] = []
    for epoch in range(1, config.epochs + 1):
        state = zero_state(params, batch)
        total_nll = 0.0
        positions = 0
        for step_no, start in enumerate(range(0, length - 1, bptt)):
            x = data[:, start : start + bptt]
            y = data[:, start + 1 : start + 1 + bptt]
            x = x[:, : y.shape[1]]
            loss, grads, state = loss_and_grads(
                params, x, y, state, dropout_keep=config.dropout_keep, rng=rng
            )
            if not math.isfinite(loss):
                raise NumericalError(
                    f"non-finite loss at epoch {epoch}, step {step_no} (lr={lr})"
                )
            _sgd_step(params, grads, lr, config.grad_clip_norm)
            total_nll += loss * x.size
            positions += x.size
        if not params.all_finite():
            raise NumericalError(f"non-finite parameter after epoch {epoch}")
        train_ppl = math.exp(total_nll / positions)
        valid_ppl = score(params, valid_corpus, vocab).ppl
        trace.append(EpochStats(epoch, train_ppl, valid_ppl, lr))
        if valid_ppl < best_valid:
            best_valid = valid_ppl
        else:
            lr *= config.lr_decay
    return TrainResult(params, trace)


def trace_tsv(trace: list[EpochStats]) -> str:
    lines = ["epoch\ttrain_ppl\tvalid_ppl\tlr"]
    for row in trace:
        lines.append(
            f"{row.epoch}\t{row.train_ppl:.6f}\t{row.valid_ppl:.6f}\t{row.learning_rate:.8f}"
        )
    return "\n".join(lines) + "\n"


def score(params: NeuralLMParams, corpus: Corpus, vocab: Vocabulary) -> ScoreResult:
    """Total log-probability and perplexity, fresh state per utterance.

    Scoring covers each utterance's words plus the terminating eos, mirroring
    the n-gram perplexity definition.  Same-length utterances are batched;
    the result does not depend on utterance order.
    """
    if len(corpus) == 0:
        raise NeuralLMError("cannot score an empty corpus")
    by_length: dict[int, list[list[int]]] = {}
    words = 0
    oov = 0
    for utt in corpus:
        ids = [vocab.bos_id]
        for tok in utt.tokens:
            words += 1
            if tok.surface not in vocab:
                oov += 1
            ids.append(vocab.id_or_unk(tok.surface))
        ids.append(vocab.eos_id)
        by_length.setdefault(len(ids), []).append(ids)
    total_nll = 0.0
    scored = 0
    for length in sorted(by_length):
        rows = by_length[length]
        for chunk_start in range(0, len(rows), 128):
            chunk = np.asarray(rows[chunk_start : chunk_start + 128], dtype=np.int64)
            inputs, targets = chunk[:, :-1], chunk[:, 1:]
            state = zero_state(params, chunk.shape[0])
            top, _, _, _ = _run_forward(params, inputs, state)
            logits = top @ params.embedding.T + params.out_bias
            logp = _log_softmax(logits)
            b_idx = np.arange(chunk.shape[0])[:, None]
            t_idx = np.arange(targets.shape[1])[None, :]
            total_nll -= float(logp[b_idx, t_idx, targets].sum())
            scored += targets.size
    ppl = math.exp(total_nll / scored)
    return ScoreResult(-total_nll / _LOG10, ppl, scored, words, oov)


def sample(
    params: NeuralLMParams,
    vocab: Vocabulary,
    config: SampleConfig,
    tag_map: dict[str, Lang] | None = None,
    source_label: str = "gen",
    max_utterance_tokens: int | None = None,
    max_retries: int = 10,
) -> Corpus:
    """Ancestral sampling from bos; each eos closes an utterance.

    Generation stops once the emitted token count reaches max_tokens (the
    final utterance is completed first).  An utterance that exceeds
    max_utterance_tokens without eos is discarded and resampled; after
    max_retries consecutive failures a SamplingError is raised.  Sampled
    words get language tags from the tag_map (unknown words stay untagged);
    bos is never emitted, and unk is excluded when forbid_unk is set.
    """
    rng = np.random.default_rng(config.seed)
    tag_map = tag_map or {}
    cap = max_utterance_tokens if max_utterance_tokens is not None else config.max_tokens
    banned = [vocab.bos_id] + ([vocab.unk_id] if config.forbid_unk else [])

    utterances: list[Utterance] = []
    emitted = 0
    failures = 0
    while emitted < config.max_tokens:
        state = zero_state(params, 1)
        prev = vocab.bos_id
        word_ids: list[int] = []
        ended = False
        while len(word_ids) < cap:
            logits, state = forward(params, [prev], state)
            logits = logits[0].copy()
            logits[banned] = -np.inf
            if config.greedy:
                choice = int(np.argmax(logits))
            else:
                scaled = logits / config.temperature
                scaled -= scaled.max()
                probs = np.exp(scaled)
                probs /= probs.sum()
                choice = int(rng.choice(params.vocab_size, p=probs))
            if choice == vocab.eos_id:
                ended = True
                break
            word_ids.append(choice)
            prev = choice
        if not ended or not word_ids:
            # Greedy decoding is deterministic, so a capped utterance would
            # repeat forever; emit the truncation instead of retrying.
            if not (config.greedy and word_ids):
                failures += 1
                if failures > max_retries:
                    raise SamplingError(
                        f"gave up after {failures} utterances without a usable eos "
                        f"(cap {cap} tokens)"
                    )
                continue
        failures = 0
        tokens = []
        for wid in word_ids:
            surface = vocab.word(wid)
            tokens.append(TaggedToken(surface, tag_map.get(surface, Lang.UNTAGGED)))
        utterances.append(Utterance(f"{source_label}-{len(utterances) + 1}", tokens))
        emitted += len(tokens)
    return Corpus(utterances, source_label)


def save_params(
    path, params: NeuralLMParams, vocab: Vocabulary, seed: int = 0, epoch: int = 0
) -> None:
    """Self-describing binary checkpoint: JSON header plus raw float64 tensors.

    The byte layout is fully deterministic for identical inputs.
    """
    header = {
        "format": "cslm-tied-lstm-lm",
        "version": _CHECKPOINT_VERSION,
        "vocab_size": params.vocab_size,
        "embed_dim": params.embed_dim,
        "hidden_dim": params.hidden_dim,
        "num_layers": params.num_layers,
        "seed": seed,
        "epoch": epoch,
        "dtype": "<f8",
        "tensors": [{"name": n, "shape": list(a.shape)} for n, a in params.tensors()],
        "words": vocab.id_to_word,
    }
    blob = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    with Path(path).open("wb") as handle:
        handle.write(_CHECKPOINT_MAGIC)
        handle.write(len(blob).to_bytes(8, "big"))
        handle.write(blob)
        for _, arr in params.tensors():
            handle.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def load_params(path) -> tuple[NeuralLMParams, Vocabulary, dict]:
    with Path(path).open("rb") as handle:
        magic = handle.read(len(_CHECKPOINT_MAGIC))
        if magic != _CHECKPOINT_MAGIC:
            raise NeuralLMError(f"{path}: not a model checkpoint")
        size = int.from_bytes(handle.read(8), "big")
        header = json.loads(handle.read(size).decode("utf-8"))
        if header.get("version") != _CHECKPOINT_VERSION:
            raise NeuralLMError(f"{path}: unsupported checkpoint version {header.get('version')}")
        arrays = {}
        for spec in header["tensors"]:
            shape = tuple(spec["shape"])
            count = int(np.prod(shape)) if shape else 1
            buf = handle.read(count * 8)
            if len(buf) != count * 8:
                raise NeuralLMError(f"{path}: truncated tensor {spec['name']}")
            arrays[spec["name"]] = np.frombuffer(buf, dtype="<f8").reshape(shape).copy()
    num_layers = header["num_layers"]
    layers = [
        LayerParams(arrays[f"layer{i}.w"], arrays[f"layer{i}.b"]) for i in range(num_layers)
    ]
    params = NeuralLMParams(
        header["vocab_size"],
        header["embed_dim"],
        header["hidden_dim"],
        num_layers,
        arrays["embedding"],
        layers,
        arrays["out_bias"],
    )
    vocab = Vocabulary(header["words"])
    meta = {"seed": header["seed"], "epoch": header["epoch"]}
    return params, vocab, meta


class NeuralScorer:
    """Adapter giving a trained model the n-gram logprob/perplexity interface.

    Histories longer than the utterance so far are not needed: the scorer
    keeps no cross-call state and is intended for whole-sequence scoring via
    sequence_logprob.
    """

    def __init__(self, params: NeuralLMParams, vocab: Vocabulary):
        self.params = params
        self.vocab = vocab

    def sequence_logprob(self, surfaces: list[str]) -> float:
        """log10 probability of the word sequence plus its eos terminator."""
        ids = [self.vocab.bos_id] + [self.vocab.id_or_unk(w) for w in surfaces]
        ids.append(self.vocab.eos_id)
        arr = np.asarray(ids, dtype=np.int64)
        logits, _ = forward(self.params, arr[:-1])
        logp = _log_softmax(logits)
        total = float(logp[np.arange(len(arr) - 1), arr[1:]].sum())
        return total / _LOG10
