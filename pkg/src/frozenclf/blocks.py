"""The classification-head zoo.

Every head consumes one frozen feature sequence (T×d matrix plus mask) and
emits two class logits. Variants:

* naive heads: ``dense_first_token``, ``max_pool``, ``avg_pool``
* recurrent: ``lstm_head`` (1- or 2-layer BiLSTM over the true-length
  prefix, final forward state + first backward state -> dropout -> dense)
* ``attention``: linear scoring e_t = v·h_t, masked softmax, weighted sum
* four channel/spatial attention blocks adapted from 2-D vision modules to
  sequences: ``rcab`` (channel-only squeeze/excite), ``cbam`` (channel gate
  from max+avg pools through a shared bottleneck, then a width-7 spatial
  conv gate), ``csar`` (parallel channel and spatial gates fused by a 1x1
  conv over two synthetic channels), ``ram`` (variance-pooled channel gate
  summed with a width-3 spatial conv gate pre-sigmoid)
* ``axel``: attention context + shared-weight FC over max- and avg-pooled
  vectors, the three d-vectors stacked as synthetic channels and fused by a
  1x1 conv; ``axel_ablation`` applies exactly one modification (drop a
  branch, untie the shared FC, sum instead of convolve, tanh instead of
  ReLU, or add a variance-pool branch).

Channel attention here pools over the sequence axis so the gate lives in
feature space and can stack against the attention context; spatial gates
act over positions. Masked positions are zeroed before any cross-position
convolution, which makes appended padding indistinguishable from the
convolution's own zero padding, so padded logits equal unpadded ones.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from . import tensor as tc
from .tensor import ShapeError, Tensor

VARIANTS = (
    "dense_first_token",
    "max_pool",
    "avg_pool",
    "lstm_head",
    "attention",
    "rcab",
    "cbam",
    "csar",
    "ram",
    "axel",
    "axel_ablation",
)

ABLATIONS = ("att_avg_fc", "att_max_fc", "att_avg_fc_max_fc", "sum_fusion", "tanh_act", "var_fc")

N_CLASSES = 2  # binary hate-speech task


@dataclass(frozen=True)
class BlockConfig:
    """Discriminated head choice plus its hyperparameters."""

    variant: str
    d: int
    hidden: int = 128
    lstm_layers: int = 1
    reduction: int = 16
    dropout: float = 0.0
    ablation: str | None = None
    attention_projection: bool = False

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}, expected one of {VARIANTS}")
        if self.d < 1:
            raise ValueError("feature dim d must be >= 1")
        if self.variant == "lstm_head" and self.lstm_layers not in (1, 2):
            raise ValueError("lstm_layers must be 1 or 2")
        if self.variant == "axel_ablation":
            if self.ablation not in ABLATIONS:
                raise ValueError(f"axel_ablation needs ablation in {ABLATIONS}, got {self.ablation!r}")
        elif self.ablation is not None:
            raise ValueError("ablation is only valid for variant 'axel_ablation'")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must lie in [0, 1)")
        if self.reduction < 1:
            raise ValueError("reduction ratio must be >= 1")

    @property
    def bottleneck(self) -> int:
        return max(1, self.d // self.reduction)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, doc: dict) -> "BlockConfig":
        allowed = set(cls.__dataclass_fields__)
        unknown = set(doc) - allowed
        if unknown:
            raise ValueError(f"unknown BlockConfig keys: {sorted(unknown)}")
        if "variant" not in doc or "d" not in doc:
            raise ValueError("BlockConfig requires 'variant' and 'd'")
        return cls(**doc)


class Head:
    """A built classification head: parameters plus a pure forward pass."""

    def __init__(self, config: BlockConfig, params: dict[str, Tensor]):
        self.config = config
        self.params = params

    def parameters(self) -> list[Tensor]:
        return list(self.params.values())

    @property
    def param_count(self) -> int:
        return sum(p.data.size for p in self.params.values())

    def get_state(self) -> dict[str, np.ndarray]:
        return {name: p.data.copy() for name, p in self.params.items()}

    def set_state(self, state: dict[str, np.ndarray]) -> None:
        for name, p in self.params.items():
            p.data = state[name].copy()

    # -- forward -----------------------------------------------------------

    def forward(self, features: np.ndarray, mask: np.ndarray | None = None,
                training: bool = False, rng: np.random.Generator | None = None) -> Tensor:
        features = np.asarray(features)
        if features.ndim != 2:
            raise ShapeError(f"features must be T×d, got shape {features.shape}")
        if features.shape[1] != self.config.d:
            raise ShapeError(
                f"feature dim {features.shape[1]} does not match head dim {self.config.d}")
        if mask is None:
            mask = np.ones(features.shape[0], dtype=bool)
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != (features.shape[0],):
            raise ShapeError("mask length must equal sequence length")
        if not mask.any():
            raise tc.EmptySequenceError("all positions masked")
        h = Tensor(features)
        fn = getattr(self, f"_forward_{self.config.variant}")
        if self.config.variant == "lstm_head":
            return fn(h, mask, training, rng)
        return fn(h, mask)

    def _dense_out(self, vec: Tensor) -> Tensor:
        return tc.add(tc.matmul(self.params["out_w"], vec), self.params["out_b"])

    def _forward_dense_first_token(self, h: Tensor, mask: np.ndarray) -> Tensor:
        first = tc.reshape(tc.narrow(h, 0, 0, 1), (self.config.d,))
        return self._dense_out(first)

    def _forward_max_pool(self, h: Tensor, mask: np.ndarray) -> Tensor:
        return self._dense_out(tc.pool_axis(h, mask, "max"))

    def _forward_avg_pool(self, h: Tensor, mask: np.ndarray) -> Tensor:
        return self._dense_out(tc.pool_axis(h, mask, "avg"))

    def _forward_lstm_head(self, h: Tensor, mask: np.ndarray, training: bool,
                           rng: np.random.Generator | None) -> Tensor:
        # padding only ever trails the sequence, so masking = slicing
        seq = Tensor(h.data[mask])
        layer_params = []
        for layer in range(self.config.lstm_layers):
            layer_params.append({
                "fwd": tc.LSTMParams(self.params[f"l{layer}_fwd_w_ih"],
                                     self.params[f"l{layer}_fwd_w_hh"],
                                     self.params[f"l{layer}_fwd_b"]),
                "bwd": tc.LSTMParams(self.params[f"l{layer}_bwd_w_ih"],
                                     self.params[f"l{layer}_bwd_w_hh"],
                                     self.params[f"l{layer}_bwd_b"]),
            })
        out = tc.lstm_forward(seq, layer_params, direction="bi", layers=self.config.lstm_layers)
        t_len = out.data.shape[0]
        hid = self.config.hidden
        fwd_last = tc.narrow(tc.narrow(out, 0, t_len - 1, 1), 1, 0, hid)
        bwd_first = tc.narrow(tc.narrow(out, 0, 0, 1), 1, hid, hid)
        state = tc.reshape(tc.concat([fwd_last, bwd_first], axis=1), (2 * hid,))
        state = tc.dropout(state, self.config.dropout, training, rng)
        return self._dense_out(state)

    def _attention_context(self, h: Tensor, mask: np.ndarray, v_name: str = "att_v") -> Tensor:
        if self.config.attention_projection:
            proj = tc.tanh(tc.add(tc.matmul(h, self.params["att_proj_w"]), self.params["att_proj_b"]))
            scores = tc.matmul(proj, self.params[v_name])
        else:
            scores = tc.matmul(h, self.params[v_name])
        alpha = tc.masked_softmax(scores, mask)
        return tc.matmul(alpha, h)

    def _forward_attention(self, h: Tensor, mask: np.ndarray) -> Tensor:
        return self._dense_out(self._attention_context(h, mask))

    def _bottleneck_gate(self, vec: Tensor, prefix: str = "ch") -> Tensor:
        z = tc.relu(tc.add(tc.matmul(self.params[f"{prefix}_w1"], vec), self.params[f"{prefix}_b1"]))
        return tc.add(tc.matmul(self.params[f"{prefix}_w2"], z), self.params[f"{prefix}_b2"])

    def _forward_rcab(self, h: Tensor, mask: np.ndarray) -> Tensor:
        gate = tc.sigmoid(self._bottleneck_gate(tc.pool_axis(h, mask, "avg")))
        enhanced = tc.mul(h, gate)
        return self._dense_out(tc.pool_axis(enhanced, mask, "avg"))

    def _mask_column(self, h: Tensor, mask: np.ndarray) -> Tensor:
        return Tensor(mask.astype(h.data.dtype)[:, None])

    def _forward_cbam(self, h: Tensor, mask: np.ndarray) -> Tensor:
        channel_pre = tc.add(self._bottleneck_gate(tc.pool_axis(h, mask, "max")),
                             self._bottleneck_gate(tc.pool_axis(h, mask, "avg")))
        h1 = tc.mul(h, tc.sigmoid(channel_pre))
        h1_masked = tc.mul(h1, self._mask_column(h, mask))
        t_len = h.data.shape[0]
        smax = tc.reshape(tc.reduce_max(h1_masked, axis=1), (1, t_len))
        savg = tc.reshape(tc.reduce_mean(h1_masked, axis=1), (1, t_len))
        stats = tc.pad_cols(tc.concat([smax, savg], axis=0), 3, 3)
        spatial = tc.sigmoid(tc.conv1d(stats, self.params["sp_w"], self.params["sp_b"]))
        h2 = tc.mul(h1, tc.transpose(spatial))
        return self._dense_out(tc.pool_axis(h2, mask, "avg"))

    def _forward_csar(self, h: Tensor, mask: np.ndarray) -> Tensor:
        t_len = h.data.shape[0]
        channel_gate = tc.sigmoid(self._bottleneck_gate(tc.pool_axis(h, mask, "avg")))
        h_masked = tc.mul(h, self._mask_column(h, mask))
        padded = tc.pad_cols(tc.transpose(h_masked), 1, 1)
        spatial_gate = tc.sigmoid(tc.conv1d(padded, self.params["sp_w"], self.params["sp_b"]))
        h_channel = tc.mul(h, channel_gate)
        h_spatial = tc.mul(h, tc.reshape(spatial_gate, (t_len, 1)))
        fused = tc.add(
            tc.add(tc.mul(h_channel, tc.narrow(self.params["fuse_w"], 0, 0, 1)),
                   tc.mul(h_spatial, tc.narrow(self.params["fuse_w"], 0, 1, 1))),
            self.params["fuse_b"])
        return self._dense_out(tc.pool_axis(fused, mask, "avg"))

    def _forward_ram(self, h: Tensor, mask: np.ndarray) -> Tensor:
        t_len = h.data.shape[0]
        channel_pre = self._bottleneck_gate(tc.pool_axis(h, mask, "var"))
        h_masked = tc.mul(h, self._mask_column(h, mask))
        padded = tc.pad_cols(tc.transpose(h_masked), 1, 1)
        spatial_pre = tc.reshape(tc.conv1d(padded, self.params["sp_w"], self.params["sp_b"]),
                                 (t_len, 1))
        joint = tc.sigmoid(tc.add(spatial_pre, channel_pre))
        return self._dense_out(tc.pool_axis(tc.mul(h, joint), mask, "avg"))

    # -- AXEL ---------------------------------------------------------------

    def _axel_branches(self, h: Tensor, mask: np.ndarray, ablation: str | None) -> list[Tensor]:
        act = tc.tanh if ablation == "tanh_act" else tc.relu

        def branch(pooled: Tensor, which: str) -> Tensor:
            if ablation == "att_avg_fc_max_fc":
                w, b = self.params[f"{which}_w"], self.params[f"{which}_b"]
            else:
                w, b = self.params["shared_w"], self.params["shared_b"]
            return act(tc.add(tc.matmul(w, pooled), b))

        channels = [self._attention_context(h, mask)]
        if ablation != "att_avg_fc":
            channels.append(branch(tc.pool_axis(h, mask, "max"), "max"))
        if ablation != "att_max_fc":
            channels.append(branch(tc.pool_axis(h, mask, "avg"), "avg"))
        if ablation == "var_fc":
            channels.append(branch(tc.pool_axis(h, mask, "var"), "var"))
        return channels

    def _axel_forward(self, h: Tensor, mask: np.ndarray, ablation: str | None) -> Tensor:
        channels = self._axel_branches(h, mask, ablation)
        if ablation == "sum_fusion":
            fused = channels[0]
            for ch in channels[1:]:
                fused = tc.add(fused, ch)
        else:
            stacked = tc.concat([tc.reshape(ch, (1, self.config.d)) for ch in channels], axis=0)
            fused = tc.reshape(tc.conv1d(stacked, self.params["fuse_w"], self.params["fuse_b"]),
                               (self.config.d,))
        return self._dense_out(fused)

    def _forward_axel(self, h: Tensor, mask: np.ndarray) -> Tensor:
        return self._axel_forward(h, mask, None)

    def _forward_axel_ablation(self, h: Tensor, mask: np.ndarray) -> Tensor:
        return self._axel_forward(h, mask, self.config.ablation)


# ---------------------------------------------------------------------------
# construction


def _dense_params(rng, d_in: int, params: dict[str, Tensor]) -> None:
    params["out_w"] = Tensor(tc.glorot_uniform(rng, (N_CLASSES, d_in), d_in, N_CLASSES), requires_grad=True)
    params["out_b"] = Tensor(np.zeros(N_CLASSES, dtype=np.float32), requires_grad=True)


def _bottleneck_params(rng, d: int, dr: int, params: dict[str, Tensor], prefix: str = "ch") -> None:
    params[f"{prefix}_w1"] = Tensor(tc.glorot_uniform(rng, (dr, d), d, dr), requires_grad=True)
    params[f"{prefix}_b1"] = Tensor(np.zeros(dr, dtype=np.float32), requires_grad=True)
    params[f"{prefix}_w2"] = Tensor(tc.glorot_uniform(rng, (d, dr), dr, d), requires_grad=True)
    params[f"{prefix}_b2"] = Tensor(np.zeros(d, dtype=np.float32), requires_grad=True)


def _attention_params(rng, cfg: BlockConfig, params: dict[str, Tensor]) -> None:
    if cfg.attention_projection:
        params["att_proj_w"] = Tensor(tc.glorot_uniform(rng, (cfg.d, cfg.d), cfg.d, cfg.d), requires_grad=True)
        params["att_proj_b"] = Tensor(np.zeros(cfg.d, dtype=np.float32), requires_grad=True)
    params["att_v"] = Tensor(tc.glorot_uniform(rng, (cfg.d,), cfg.d, 1), requires_grad=True)


def _conv_params(rng, c_out: int, c_in: int, k: int, params: dict[str, Tensor],
                 w_name: str, b_name: str) -> None:
    params[w_name] = Tensor(tc.glorot_uniform(rng, (c_out, c_in, k), c_in * k, c_out * k), requires_grad=True)
    params[b_name] = Tensor(np.zeros(c_out, dtype=np.float32), requires_grad=True)


def _lstm_layer_params(rng, d_in: int, hidden: int, layer: int, params: dict[str, Tensor]) -> None:
    for direction in ("fwd", "bwd"):
        params[f"l{layer}_{direction}_w_ih"] = Tensor(
            tc.glorot_uniform(rng, (d_in, 4 * hidden), d_in, 4 * hidden), requires_grad=True)
        params[f"l{layer}_{direction}_w_hh"] = Tensor(
            tc.glorot_uniform(rng, (hidden, 4 * hidden), hidden, 4 * hidden), requires_grad=True)
        params[f"l{layer}_{direction}_b"] = Tensor(np.zeros(4 * hidden, dtype=np.float32), requires_grad=True)


def build(config: BlockConfig, init_seed: int = 0) -> Head:
    """Initialize a head: fan-based uniform weights, zero biases, seeded."""
    rng = np.random.default_rng(init_seed)
    d, dr = config.d, config.bottleneck
    params: dict[str, Tensor] = {}
    v = config.variant

    if v in ("dense_first_token", "max_pool", "avg_pool"):
        _dense_params(rng, d, params)
    elif v == "lstm_head":
        d_in = d
        for layer in range(config.lstm_layers):
            _lstm_layer_params(rng, d_in, config.hidden, layer, params)
            d_in = 2 * config.hidden
        _dense_params(rng, 2 * config.hidden, params)
    elif v == "attention":
        _attention_params(rng, config, params)
        _dense_params(rng, d, params)
    elif v == "rcab":
        _bottleneck_params(rng, d, dr, params)
        _dense_params(rng, d, params)
    elif v == "cbam":
        _bottleneck_params(rng, d, dr, params)
        _conv_params(rng, 1, 2, 7, params, "sp_w", "sp_b")
        _dense_params(rng, d, params)
    elif v == "csar":
        _bottleneck_params(rng, d, dr, params)
        _conv_params(rng, 1, d, 3, params, "sp_w", "sp_b")
        params["fuse_w"] = Tensor(tc.glorot_uniform(rng, (2,), 2, 1), requires_grad=True)
        params["fuse_b"] = Tensor(np.zeros(1, dtype=np.float32), requires_grad=True)
        _dense_params(rng, d, params)
    elif v == "ram":
        _bottleneck_params(rng, d, dr, params)
        _conv_params(rng, 1, d, 3, params, "sp_w", "sp_b")
        _dense_params(rng, d, params)
    elif v in ("axel", "axel_ablation"):
        ablation = config.ablation
        _attention_params(rng, config, params)
        if ablation == "att_avg_fc_max_fc":
            for which in ("max", "avg"):
                params[f"{which}_w"] = Tensor(tc.glorot_uniform(rng, (d, d), d, d), requires_grad=True)
                params[f"{which}_b"] = Tensor(np.zeros(d, dtype=np.float32), requires_grad=True)
        else:
            params["shared_w"] = Tensor(tc.glorot_uniform(rng, (d, d), d, d), requires_grad=True)
            params["shared_b"] = Tensor(np.zeros(d, dtype=np.float32), requires_grad=True)
        if ablation != "sum_fusion":
            n_channels = {None: 3, "att_avg_fc": 2, "att_max_fc": 2,
                          "att_avg_fc_max_fc": 3, "tanh_act": 3, "var_fc": 4}[ablation]
            _conv_params(rng, 1, n_channels, 1, params, "fuse_w", "fuse_b")
        _dense_params(rng, d, params)
    else:  # pragma: no cover - guarded by BlockConfig
        raise ValueError(f"unknown variant {v!r}")

    return Head(config, params)


def all_variant_configs(d: int, hidden: int = 8, reduction: int = 4) -> list[BlockConfig]:
    """One config per head variant, used by the gradient and invariance suites."""
    configs = [
        BlockConfig("dense_first_token", d),
        BlockConfig("max_pool", d),
        BlockConfig("avg_pool", d),
        BlockConfig("lstm_head", d, hidden=hidden, lstm_layers=1),
        BlockConfig("lstm_head", d, hidden=hidden, lstm_layers=2),
        BlockConfig("attention", d),
        BlockConfig("rcab", d, reduction=reduction),
        BlockConfig("cbam", d, reduction=reduction),
        BlockConfig("csar", d, reduction=reduction),
        BlockConfig("ram", d, reduction=reduction),
        BlockConfig("axel", d),
    ]
    configs.extend(BlockConfig("axel_ablation", d, ablation=ab) for ab in ABLATIONS)
    return configs
