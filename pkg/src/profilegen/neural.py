"""Dense feed-forward networks, adversarial losses and the training loop.

Everything here is plain numpy. Networks are small (tens of units per layer,
day profiles of 24-48 steps), so explicit forward/backward passes are both
fast enough and fully deterministic under a seeded generator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

LEAKY_SLOPE = 0.2
SCORE_CLAMP = 1e-7
HIDDEN_ACTIVATIONS = ("relu", "leaky_relu")
OUTPUT_ACTIVATIONS = ("sigmoid", "softmax", "identity")

#: Order of the population statistics matched against the real data:
#: five percentiles plus the per-timestep mean.
STAT_PERCENTILES = (10.0, 25.0, 50.0, 75.0, 90.0)


def sigmoid(x):
    """Logistic function, stable for |x| up to ~700."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    if out.ndim == 0:
        return float(out)
    return out


def schedule(v_start: float, v_end: float, epoch: int, n_epochs: int) -> float:
    """Geometric interpolation from v_start (epoch 0) to v_end (epoch n_epochs).

    Used both for the learning rate and for the instance-noise level.
    """
    if v_start <= 0 or v_end <= 0:
        raise ValueError("schedule endpoints must be positive")
    if not 0 <= epoch <= n_epochs:
        raise ValueError(f"epoch {epoch} outside [0, {n_epochs}]")
    return v_start * (v_end / v_start) ** (epoch / n_epochs)


def _clamp_scores(scores) -> np.ndarray:
    return np.clip(np.asarray(scores, dtype=float), SCORE_CLAMP, 1.0 - SCORE_CLAMP)


def d_loss(real_scores, fake_scores) -> float:
    """Binary cross-entropy of the discriminator against real=1 / fake=0 labels."""
    r = _clamp_scores(real_scores)
    f = _clamp_scores(fake_scores)
    return float(-np.mean(np.log(r)) - np.mean(np.log(1.0 - f)))


def g_adv_loss(fake_scores) -> float:
    """Generator reward for fooling the discriminator."""
    return float(-np.mean(np.log(_clamp_scores(fake_scores))))


def sum_penalty(population, weight: float) -> float:
    """Penalty on the mean profile sum of a generated population drifting from 1."""
    pop = np.asarray(population, dtype=float)
    if pop.size == 0:
        raise ValueError("population must be nonempty")
    n = pop.shape[0]
    return float(weight * (pop.sum() / n - 1.0) ** 2)


def population_stats(population) -> np.ndarray:
    """Per-timestep 10/25/50/75/90th percentiles and mean, shape (6, T)."""
    pop = np.asarray(population, dtype=float)
    pct = np.percentile(pop, STAT_PERCENTILES, axis=0)
    return np.vstack([pct, pop.mean(axis=0)])


def percentile_penalty(population, targets, weight: float) -> float:
    """Squared distance between a population's statistics and fixed targets.

    ``targets`` must be a (6, T) array in the :data:`STAT_PERCENTILES` + mean
    order, normally precomputed once over the real training set.
    """
    pop = np.asarray(population, dtype=float)
    if pop.shape[0] < 2:
        raise ValueError("population must contain at least 2 profiles")
    stats = population_stats(pop)
    targets = np.asarray(targets, dtype=float)
    if stats.shape != targets.shape:
        raise ValueError(f"targets shape {targets.shape} != stats shape {stats.shape}")
    return float(weight * np.sum((stats - targets) ** 2))


def _pct_penalty_and_grad(pop: np.ndarray, targets: np.ndarray, weight: float) -> tuple[float, np.ndarray]:
    """Penalty value and gradient from a single shared sort.

    The percentile estimator interpolates linearly between order statistics,
    so each percentile routes gradient to at most two samples per timestep.
    """
    n, t = pop.shape
    order = np.argsort(pop, axis=0, kind="stable")  # (n, T)
    cols = np.arange(t)
    stats = np.empty((6, t))
    for k, p in enumerate(STAT_PERCENTILES):
        pos = (n - 1) * p / 100.0
        lo = int(math.floor(pos))
        gamma = pos - lo
        stats[k] = (1.0 - gamma) * pop[order[lo], cols]
        if gamma > 0.0:
            stats[k] += gamma * pop[order[lo + 1], cols]
    stats[5] = pop.mean(axis=0)

    diff = stats - targets
    value = float(weight * np.sum(diff**2))
    scaled = 2.0 * weight * diff
    grad = np.zeros_like(pop)
    for k, p in enumerate(STAT_PERCENTILES):
        pos = (n - 1) * p / 100.0
        lo = int(math.floor(pos))
        gamma = pos - lo
        # one entry per column, so plain fancy indexing accumulates safely
        grad[order[lo], cols] += (1.0 - gamma) * scaled[k]
        if gamma > 0.0:
            grad[order[lo + 1], cols] += gamma * scaled[k]
    grad += scaled[5] / n
    return value, grad


def percentile_penalty_grad(population, targets, weight: float) -> np.ndarray:
    """Gradient of :func:`percentile_penalty` with respect to the population."""
    pop = np.asarray(population, dtype=float)
    _, grad = _pct_penalty_and_grad(pop, np.asarray(targets, dtype=float), weight)
    return grad


# ---------------------------------------------------------------------------
# Dense networks
# ---------------------------------------------------------------------------


@dataclass
class DenseNet:
    """A stack of fully connected layers.

    Weights are stored (in_dim, out_dim); activations flow row-major, one
    sample per row. Dropout (inverted scaling) applies to hidden outputs
    during training only.
    """

    layer_dims: list[int]
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    hidden_activation: str = "relu"
    output_activation: str = "sigmoid"
    dropout_p: float = 0.0

    def __post_init__(self):
        if self.hidden_activation not in HIDDEN_ACTIVATIONS:
            raise ValueError(f"unknown hidden activation {self.hidden_activation!r}")
        if self.output_activation not in OUTPUT_ACTIVATIONS:
            raise ValueError(f"unknown output activation {self.output_activation!r}")
        if not 0.0 <= self.dropout_p < 1.0:
            raise ValueError("dropout_p must lie in [0, 1)")
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            want = (self.layer_dims[i], self.layer_dims[i + 1])
            if w.shape != want or b.shape != (want[1],):
                raise ValueError(f"layer {i}: weight shape {w.shape} != {want}")

    @property
    def n_layers(self) -> int:
        return len(self.weights)

    @property
    def in_dim(self) -> int:
        return self.layer_dims[0]

    @property
    def out_dim(self) -> int:
        return self.layer_dims[-1]

    def parameters(self) -> list[np.ndarray]:
        params: list[np.ndarray] = []
        for w, b in zip(self.weights, self.biases):
            params.append(w)
            params.append(b)
        return params

    def copy(self) -> "DenseNet":
        return replace(
            self,
            layer_dims=list(self.layer_dims),
            weights=[w.copy() for w in self.weights],
            biases=[b.copy() for b in self.biases],
        )


@dataclass
class ForwardCache:
    """Per-layer intermediates needed for the exact backward pass."""

    inputs: list[np.ndarray]          # layer inputs (post-dropout of the previous layer)
    pre_activations: list[np.ndarray]
    dropout_masks: list[np.ndarray | None]
    output: np.ndarray


def init_net(
    layer_dims: list[int],
    hidden_activation: str,
    output_activation: str,
    dropout_p: float,
    rng: np.random.Generator,
) -> DenseNet:
    """He-scaled random weights, zero biases."""
    weights, biases = [], []
    for fan_in, fan_out in zip(layer_dims[:-1], layer_dims[1:]):
        scale = math.sqrt(2.0 / fan_in)
        weights.append(rng.standard_normal((fan_in, fan_out)) * scale)
        biases.append(np.zeros(fan_out))
    return DenseNet(list(layer_dims), weights, biases, hidden_activation, output_activation, dropout_p)


def _hidden_act(name: str, z: np.ndarray) -> np.ndarray:
    if name == "relu":
        return np.maximum(z, 0.0)
    return np.where(z > 0, z, LEAKY_SLOPE * z)


def _hidden_act_grad(name: str, z: np.ndarray) -> np.ndarray:
    if name == "relu":
        return (z > 0).astype(float)
    return np.where(z > 0, 1.0, LEAKY_SLOPE)


def _softmax(z: np.ndarray) -> np.ndarray:
    shifted = z - z.max(axis=1, keepdims=True)
    ez = np.exp(shifted)
    return ez / ez.sum(axis=1, keepdims=True)


def forward(
    net: DenseNet,
    x: np.ndarray,
    rng: np.random.Generator | None = None,
    train: bool = False,
) -> tuple[np.ndarray, ForwardCache]:
    """Run the network; returns (output, cache). Dropout needs train=True and an rng."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[1] != net.in_dim:
        raise ValueError(f"input dim {x.shape[1]} != expected {net.in_dim}")
    use_dropout = train and net.dropout_p > 0.0
    if use_dropout and rng is None:
        raise ValueError("dropout requires an rng in training mode")

    inputs, pre_acts, masks = [], [], []
    a = x
    last = net.n_layers - 1
    for layer, (w, b) in enumerate(zip(net.weights, net.biases)):
        z = a @ w + b
        inputs.append(a)
        pre_acts.append(z)
        if layer == last:
            if net.output_activation == "sigmoid":
                a = sigmoid(z)
            elif net.output_activation == "softmax":
                a = _softmax(z)
            else:
                a = z
            masks.append(None)
        else:
            a = _hidden_act(net.hidden_activation, z)
            if use_dropout:
                mask = (rng.random(a.shape) >= net.dropout_p).astype(float)
                a = a * mask / (1.0 - net.dropout_p)
                masks.append(mask)
            else:
                masks.append(None)
    return a, ForwardCache(inputs, pre_acts, masks, a)


@dataclass
class ParamGrads:
    weights: list[np.ndarray]
    biases: list[np.ndarray]

    def flat(self) -> list[np.ndarray]:
        out: list[np.ndarray] = []
        for w, b in zip(self.weights, self.biases):
            out.append(w)
            out.append(b)
        return out

    def add(self, other: "ParamGrads") -> "ParamGrads":
        return ParamGrads(
            [a + b for a, b in zip(self.weights, other.weights)],
            [a + b for a, b in zip(self.biases, other.biases)],
        )


def backward(net: DenseNet, grad_output: np.ndarray, cache: ForwardCache) -> tuple[ParamGrads, np.ndarray]:
    """Exact gradients w.r.t. every parameter and the input.

    ``grad_output`` is dLoss/dOutput (post-activation), same shape as the
    cached output. The dropout masks recorded during the forward pass are
    replayed, so gradients match the realized stochastic forward exactly.
    """
    grad_output = np.asarray(grad_output, dtype=float)
    if grad_output.shape != cache.output.shape:
        raise ValueError(f"grad shape {grad_output.shape} != output shape {cache.output.shape}")

    d_weights: list[np.ndarray | None] = [None] * net.n_layers
    d_biases: list[np.ndarray | None] = [None] * net.n_layers
    dh = grad_output
    last = net.n_layers - 1
    for layer in range(last, -1, -1):
        z = cache.pre_activations[layer]
        if layer == last:
            if net.output_activation == "sigmoid":
                y = sigmoid(z)
                dz = dh * y * (1.0 - y)
            elif net.output_activation == "softmax":
                y = _softmax(z)
                dz = y * (dh - np.sum(dh * y, axis=1, keepdims=True))
            else:
                dz = dh
        else:
            mask = cache.dropout_masks[layer]
            if mask is not None:
                dh = dh * mask / (1.0 - net.dropout_p)
            dz = dh * _hidden_act_grad(net.hidden_activation, z)
        d_weights[layer] = cache.inputs[layer].T @ dz
        d_biases[layer] = dz.sum(axis=0)
        dh = dz @ net.weights[layer].T
    return ParamGrads(d_weights, d_biases), dh  # type: ignore[arg-type]


class Adam:
    """Adaptive moment estimation; beta1=0.5 is the usual adversarial setting."""

    def __init__(self, params: list[np.ndarray], beta1: float = 0.5, beta2: float = 0.999, eps: float = 1e-8):
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]

    def step(self, params: list[np.ndarray], grads: list[np.ndarray], lr: float) -> None:
        self.t += 1
        bc1 = 1.0 - self.beta1**self.t
        bc2 = 1.0 - self.beta2**self.t
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p -= lr * (m / bc1) / (np.sqrt(v / bc2) + self.eps)


# ---------------------------------------------------------------------------
# GAN training
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TrainConfig:
    """Adversarial training knobs; defaults follow the standard recipe."""

    lr_start: float = 1e-2
    lr_end: float = 1e-3
    noise_start: float = 1.0
    noise_end: float = 1e-4
    n_epochs: int = 200
    batch_size: int = 100
    population: int = 50
    sum_weight: float = 0.1
    percentile_weight: float = 100.0
    dropout_d: float = 0.3
    dropout_g: float = 0.15
    noise_dim: int = 32
    generator_hidden: tuple[int, ...] = (64, 64)
    discriminator_hidden: tuple[int, ...] = (64, 32)
    seed: int = 0

    def validate(self) -> None:
        for name in ("lr_start", "lr_end", "noise_start", "noise_end", "batch_size", "population", "noise_dim"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.n_epochs < 0:
            raise ValueError("n_epochs must be >= 0")
        if self.lr_end > self.lr_start:
            raise ValueError("lr_end must not exceed lr_start")
        if self.noise_end > self.noise_start:
            raise ValueError("noise_end must not exceed noise_start")


@dataclass
class GanWeights:
    """One trained generator/discriminator pair for a (data type, day type, cluster) key."""

    data_type: str
    day_type: str
    cluster: int
    t_steps: int
    noise_dim: int
    generator: DenseNet
    discriminator: DenseNet
    real_stats: np.ndarray  # (6, T) percentile/mean targets of the training set
    training_size: int = 0


@dataclass
class EpochTrace:
    epoch: int
    d_loss: float
    g_adv: float
    sum_pen: float
    pct_pen: float


def build_gan(t_steps: int, cfg: TrainConfig, rng: np.random.Generator) -> tuple[DenseNet, DenseNet]:
    gen = init_net(
        [cfg.noise_dim, *cfg.generator_hidden, t_steps],
        hidden_activation="relu",
        output_activation="sigmoid",
        dropout_p=cfg.dropout_g,
        rng=rng,
    )
    disc = init_net(
        [t_steps, *cfg.discriminator_hidden, 1],
        hidden_activation="leaky_relu",
        output_activation="sigmoid",
        dropout_p=cfg.dropout_d,
        rng=rng,
    )
    return gen, disc


def _score_grad_real(scores: np.ndarray) -> np.ndarray:
    # d/ds of -mean(log s); zero where the clamp is active
    s = _clamp_scores(scores)
    inside = (scores > SCORE_CLAMP) & (scores < 1.0 - SCORE_CLAMP)
    return np.where(inside, -1.0 / (s * scores.shape[0]), 0.0)


def _score_grad_fake(scores: np.ndarray) -> np.ndarray:
    # d/ds of -mean(log(1-s))
    s = _clamp_scores(scores)
    inside = (scores > SCORE_CLAMP) & (scores < 1.0 - SCORE_CLAMP)
    return np.where(inside, 1.0 / ((1.0 - s) * scores.shape[0]), 0.0)


def train_gan(
    real_profiles: np.ndarray,
    cfg: TrainConfig,
    data_type: str = "",
    day_type: str = "",
    cluster: int = 0,
) -> tuple[GanWeights, list[EpochTrace]]:
    """Adversarial training on unit-sum profiles of one behaviour group.

    Per epoch the learning rate and the instance-noise level both follow the
    geometric schedule. Each minibatch performs one discriminator update on
    real+generated profiles, then one generator update on a freshly generated
    population with the composite loss (adversarial + sum penalty + percentile
    penalty). Fully deterministic under cfg.seed.
    """
    cfg.validate()
    real = np.asarray(real_profiles, dtype=float)
    if real.ndim != 2:
        raise ValueError("real_profiles must be a 2-D array of profiles")
    n_real, t_steps = real.shape
    if n_real < cfg.population:
        raise ValueError(f"need at least {cfg.population} real profiles, got {n_real}")

    rng = np.random.default_rng(cfg.seed)
    gen, disc = build_gan(t_steps, cfg, rng)
    opt_g = Adam(gen.parameters())
    opt_d = Adam(disc.parameters())
    targets = population_stats(real)

    trace: list[EpochTrace] = []
    for epoch in range(cfg.n_epochs):
        lr = schedule(cfg.lr_start, cfg.lr_end, epoch, cfg.n_epochs)
        eps = schedule(cfg.noise_start, cfg.noise_end, epoch, cfg.n_epochs)
        order = rng.permutation(n_real)
        d_losses, g_losses, l1s, l2s = [], [], [], []
        for start in range(0, n_real, cfg.batch_size):
            batch = real[order[start : start + cfg.batch_size]]
            m = batch.shape[0]

            # --- discriminator step on m real + m generated profiles (one pass)
            z = rng.standard_normal((m, cfg.noise_dim))
            fake, _ = forward(gen, z, rng=rng, train=True)
            stacked = np.vstack([batch, fake]) + eps * rng.standard_normal((2 * m, t_steps))
            scores, cache_d = forward(disc, stacked, rng=rng, train=True)
            real_scores, fake_scores = scores[:m], scores[m:]
            loss_d = d_loss(real_scores[:, 0], fake_scores[:, 0])
            dy = np.vstack([_score_grad_real(real_scores), _score_grad_fake(fake_scores)])
            grads_d, _ = backward(disc, dy, cache_d)
            opt_d.step(disc.parameters(), grads_d.flat(), lr)

            # --- generator step on a population of n profiles
            z = rng.standard_normal((cfg.population, cfg.noise_dim))
            pop, cache_g = forward(gen, z, rng=rng, train=True)
            pop_in = pop + eps * rng.standard_normal(pop.shape)
            scores, cache_d = forward(disc, pop_in, rng=rng, train=True)
            loss_adv = g_adv_loss(scores[:, 0])
            loss_l1 = sum_penalty(pop, cfg.sum_weight)
            loss_l2, l2_grad = _pct_penalty_and_grad(pop, targets, cfg.percentile_weight)
            _, d_pop = backward(disc, _score_grad_real(scores), cache_d)
            d_pop = d_pop + cfg.sum_weight * 2.0 * (pop.sum() / cfg.population - 1.0) / cfg.population
            d_pop = d_pop + l2_grad
            grads_g, _ = backward(gen, d_pop, cache_g)
            opt_g.step(gen.parameters(), grads_g.flat(), lr)

            if not (math.isfinite(loss_d) and math.isfinite(loss_adv + loss_l1 + loss_l2)):
                raise RuntimeError(f"non-finite loss at epoch {epoch}")
            d_losses.append(loss_d)
            g_losses.append(loss_adv)
            l1s.append(loss_l1)
            l2s.append(loss_l2)

        trace.append(
            EpochTrace(
                epoch=epoch,
                d_loss=float(np.mean(d_losses)),
                g_adv=float(np.mean(g_losses)),
                sum_pen=float(np.mean(l1s)),
                pct_pen=float(np.mean(l2s)),
            )
        )

    weights = GanWeights(
        data_type=data_type,
        day_type=day_type,
        cluster=cluster,
        t_steps=t_steps,
        noise_dim=cfg.noise_dim,
        generator=gen,
        discriminator=disc,
        real_stats=targets,
        training_size=n_real,
    )
    return weights, trace


def sample_population(weights: GanWeights, n: int, seed) -> np.ndarray:
    """Generate n profiles with dropout off; values in (0,1) through the sigmoid.

    ``seed`` may be an int or an existing numpy Generator (advanced in place).
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    z = rng.standard_normal((n, weights.noise_dim))
    out, _ = forward(weights.generator, z, train=False)
    return out
