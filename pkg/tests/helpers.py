"""Shared oracles for the test suite."""

import numpy as np

from semsteg.numerics import Tensor

FD_EPS = 1e-5


def _loss(fn, tensors, weights):
    out = fn(*tensors)
    outs = out if isinstance(out, tuple) else (out,)
    total = 0.0
    for o, w in zip(outs, weights):
        total = total + (o * w).sum()
    return total


def gradient_errors(fn, arrays, params=(), seed=0, max_entries=40):
    """Max relative error of reverse-mode vs central-difference gradients.

    ``fn`` maps input Tensors to one Tensor or a tuple of Tensors. The scalar
    loss is a fixed random projection of the outputs. Gradients are checked
    for every input array and every Parameter in ``params``; at most
    ``max_entries`` randomly chosen entries per array are perturbed.
    """
    rng = np.random.default_rng(seed)
    tensors = [Tensor(np.array(a, dtype=np.float64), requires_grad=True) for a in arrays]
    probe = fn(*tensors)
    outs = probe if isinstance(probe, tuple) else (probe,)
    weights = [rng.standard_normal(o.shape) for o in outs]

    for p in params:
        p.grad = None
    loss = _loss(fn, tensors, weights)
    loss.backward()
    targets = [(t.data, t.grad) for t in tensors] + [(p.data, p.grad) for p in params]

    worst = 0.0
    for data, analytic in targets:
        analytic = np.zeros_like(data) if analytic is None else analytic
        flat = data.reshape(-1)
        picks = rng.choice(flat.size, size=min(max_entries, flat.size), replace=False)
        for i in picks:
            old = flat[i]
            flat[i] = old + FD_EPS
            up = _loss(fn, [Tensor(t.data) for t in tensors], weights).item()
            flat[i] = old - FD_EPS
            down = _loss(fn, [Tensor(t.data) for t in tensors], weights).item()
            flat[i] = old
            numeric = (up - down) / (2 * FD_EPS)
            a = analytic.reshape(-1)[i]
            worst = max(worst, abs(a - numeric) / max(abs(a), abs(numeric), 1e-6))
    return worst


def away_from_kink(x, margin=1e-3):
    """Push entries with |x| < margin out to +-margin*2."""
    x = np.array(x, dtype=np.float64)
    small = np.abs(x) < margin
    x[small] = np.where(x[small] >= 0, 2 * margin, -2 * margin)
    return x


def brute_force_auc(pos, neg):
    """P(pos > neg) + 0.5 P(pos == neg) by counting every pair."""
    wins = 0.0
    for p in pos:
        for n in neg:
            wins += 1.0 if p > n else 0.5 if p == n else 0.0
    return wins / (len(pos) * len(neg))



def layer_cases(seed):
    """(name, fn, input arrays, parameters) for every layer type.

    Parameters get random (non-zero) values so bias and zero-init paths are
    exercised too.
    """
    from semsteg import numerics as nx
    from semsteg.stego import FeatureDiscriminator, InnStego, StegoConfig

    r = nx.Rng(seed)
    g = np.random.default_rng(seed)

    def randomize(module):
        for p in module.parameters():
            p.data = g.standard_normal(p.shape) * 0.5
        return module

    conv = randomize(nx.Conv2d(2, 3, 3, 1, rng=r))
    conv_s2 = randomize(nx.Conv2d(2, 3, 3, 2, rng=r))
    convt = randomize(nx.ConvTranspose2d(3, 2, 3, 2, rng=r))
    dense = randomize(nx.Dense(6, 4, rng=r))
    inn = InnStego((2, 3, 3), StegoConfig(width=4, n_blocks=2), rng=r)
    randomize(inn)
    disc = randomize(FeatureDiscriminator((2, 4, 4), width=4, rng=r))
    lrelu, sig, th, flat = nx.LeakyReLU(0.2), nx.Sigmoid(), nx.Tanh(), nx.Flatten()
    cat, spl = nx.Concat(), nx.Split(1)

    x4 = g.standard_normal((2, 2, 5, 5))
    return [
        ("conv2d", conv, [x4], conv.parameters()),
        ("conv2d_stride2", conv_s2, [x4], conv_s2.parameters()),
        ("conv_transpose2d", convt, [g.standard_normal((2, 3, 3, 3))], convt.parameters()),
        ("dense", dense, [g.standard_normal((3, 6))], dense.parameters()),
        ("leaky_relu", lrelu, [away_from_kink(g.standard_normal((2, 3, 4, 4)))], []),
        ("sigmoid", sig, [g.standard_normal((2, 3, 4, 4)) * 3], []),
        ("tanh", th, [g.standard_normal((2, 3, 4, 4))], []),
        ("flatten", flat, [g.standard_normal((2, 3, 2, 2))], []),
        ("concat", lambda a, b: cat([a, b]), [g.standard_normal((2, 1, 3, 3)), g.standard_normal((2, 2, 3, 3))], []),
        ("split", spl, [g.standard_normal((2, 3, 3, 3))], []),
        ("power_normalize", nx.power_normalize, [g.standard_normal((2, 3, 3, 3))], []),
        ("mse", nx.mse, [g.standard_normal((2, 4)), g.standard_normal((2, 4))], []),
        ("inn_forward", inn.forward, [g.standard_normal((2, 2, 3, 3)), g.standard_normal((2, 2, 3, 3))],
         inn.parameters()),
        ("inn_inverse", inn.inverse, [g.standard_normal((2, 2, 3, 3)), g.standard_normal((2, 2, 3, 3))],
         inn.parameters()),
        ("feature_discriminator", disc, [g.standard_normal((2, 2, 4, 4))], disc.parameters()),
        ("elementwise", lambda a: (a.square() + 1.0).sqrt().log() * a.exp() / (a.clip(-0.5, 0.5) + 2.0),
         [g.standard_normal((3, 4))], []),
        ("reductions", lambda a: a.reshape(4, 3)[1:, ::2].mean(axis=0) + a.sum(axis=1, keepdims=True).sum(),
         [g.standard_normal((3, 4))], []),
    ]


# Fast settings for plumbing tests; results are meaningless but deterministic.
TINY_CONFIG = {
    "codec": {"epochs": 2},
    "stego": {"epochs": 1},
    "adversary": {"attacker_size": 32, "attacker_epochs": 1, "steganalyzer_samples": 32, "steganalyzer_epochs": 1},
    "dataset": {"size": 32},
    "seeds": [1],
    "eval_pairs": 8,
}


def write_config(directory, **overrides):
    import json

    cfg = json.loads(json.dumps(TINY_CONFIG))
    cfg["output_dir"] = str(directory / "out")
    cfg.update(overrides)
    path = directory / "cfg.json"
    path.write_text(json.dumps(cfg))
    return path
