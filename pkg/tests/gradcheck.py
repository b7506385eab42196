"""Central finite-difference oracles shared by unit and acceptance tests."""
import numpy as np

from hstirs.sac.agent import actor_loss, critic_loss, temperature_loss
from hstirs.sac.network import Mlp, backward, forward


def rel_err(analytic, numeric) -> float:
    a = np.ravel(analytic)
    b = np.ravel(numeric)
    scale = max(np.linalg.norm(a), np.linalg.norm(b), 1e-10)
    return float(np.linalg.norm(a - b) / scale)


def fd_arrays(loss, arrays, h=1e-6, sample=None, rng=None):
    """Finite differences of ``loss()`` w.r.t. entries of ``arrays`` (perturbed in place).

    With ``sample`` only that many random entries per array are checked;
    the returned pairs are (indices, numeric values) per array.
    """
    out = []
    for arr in arrays:
        flat = arr.reshape(-1)
        if sample is None or sample >= flat.size:
            idx = np.arange(flat.size)
        else:
            idx = rng.choice(flat.size, size=sample, replace=False)
        num = np.empty(idx.size)
        for j, i in enumerate(idx):
            keep = flat[i]
            flat[i] = keep + h
            up = loss()
            flat[i] = keep - h
            down = loss()
            flat[i] = keep
            num[j] = (up - down) / (2 * h)
        out.append((idx, num))
    return out


def worst_error(grads, numeric) -> float:
    return max(rel_err(g.reshape(-1)[idx], num) for g, (idx, num) in zip(grads, numeric))


def check_network(seed, widths=(5, 7, 6, 3), batch=4, sample=None):
    rng = np.random.default_rng(seed)
    net = Mlp.init(widths, rng)
    for b in net.biases:
        b[...] = rng.normal(scale=0.3, size=b.shape)
    x = rng.normal(size=(batch, widths[0]))
    w = rng.normal(size=(batch, widths[-1]))
    grads, gin = backward(net, x, w)
    numeric = fd_arrays(lambda: float(np.sum(w * forward(net, x))), net.arrays(), sample=sample, rng=rng)
    err = worst_error(grads, numeric)
    num_in = fd_arrays(lambda: float(np.sum(w * forward(net, x))), [x])
    return max(err, worst_error([gin], num_in))


def _batch(rng, obs_dim, act_dim, size):
    return (rng.uniform(-1, 1, (size, obs_dim)), rng.uniform(-0.9, 0.9, (size, act_dim)),
            rng.normal(size=size))


def check_critic(seed, hidden=(8, 8), obs_dim=6, act_dim=3, size=5, sample=None):
    rng = np.random.default_rng(seed)
    critic = Mlp.init((obs_dim + act_dim, *hidden, 1), rng)
    obs, act, targets = _batch(rng, obs_dim, act_dim, size)
    _, grads = critic_loss(critic, obs, act, targets)
    numeric = fd_arrays(lambda: critic_loss(critic, obs, act, targets)[0], critic.arrays(), sample=sample, rng=rng)
    return worst_error(grads, numeric)


def check_actor(seed, hidden=(8, 8), obs_dim=6, act_dim=3, size=5, sample=None):
    rng = np.random.default_rng(seed)
    actor = Mlp.init((obs_dim, *hidden, 2 * act_dim), rng, out_scale=0.5)
    c1 = Mlp.init((obs_dim + act_dim, *hidden, 1), rng)
    c2 = Mlp.init((obs_dim + act_dim, *hidden, 1), rng)
    obs = rng.uniform(-1, 1, (size, obs_dim))
    eps = rng.normal(size=(size, act_dim))
    temperature = float(rng.uniform(0.05, 2.0))
    _, grads, _ = actor_loss(actor, c1, c2, obs, eps, temperature)
    numeric = fd_arrays(lambda: actor_loss(actor, c1, c2, obs, eps, temperature)[0], actor.arrays(),
                        sample=sample, rng=rng)
    return worst_error(grads, numeric)


def check_temperature(seed, size=16):
    rng = np.random.default_rng(seed)
    logp = rng.normal(size=size)
    log_t = np.array([rng.normal()])
    target = -3.0
    _, grad = temperature_loss(float(log_t[0]), logp, target)
    numeric = fd_arrays(lambda: temperature_loss(float(log_t[0]), logp, target)[0], [log_t])
    return rel_err([grad], numeric[0][1])
