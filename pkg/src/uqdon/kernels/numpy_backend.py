"""Pure-numpy implementations of the hot kernels.

This module is the reference backend: the numba twin in
``numba_backend`` must implement the same operations in the same order so
that both backends walk identical optimization trajectories up to
floating-point library differences (BLAS calls are shared; tanh may differ
in the last ulp).

Shared flat parameter layout (also used by checkpoints):
  a network with widths [w0, ..., wL] is stored as one contiguous float64
  vector; layer l contributes its (w_l x w_{l+1}) weight block in C order
  followed by its bias of length w_{l+1}. ``layer_offsets`` gives the start
  of each block. Hidden layers apply tanh; the output layer is linear.
"""

from __future__ import annotations

import numpy as np

NAME = "numpy"


def n_params(widths) -> int:
    return int(sum(widths[l] * widths[l + 1] + widths[l + 1] for l in range(len(widths) - 1)))


def layer_offsets(widths) -> np.ndarray:
    """Start offsets of [W0, b0, W1, b1, ...] inside the flat vector."""
    offs = np.empty(2 * (len(widths) - 1), dtype=np.int64)
    o = 0
    for l in range(len(widths) - 1):
        offs[2 * l] = o
        o += widths[l] * widths[l + 1]
        offs[2 * l + 1] = o
        o += widths[l + 1]
    return offs


def weight_view(theta, widths, offs, l):
    w_in, w_out = widths[l], widths[l + 1]
    return theta[offs[2 * l] : offs[2 * l] + w_in * w_out].reshape(w_in, w_out)


def bias_view(theta, widths, offs, l):
    return theta[offs[2 * l + 1] : offs[2 * l + 1] + widths[l + 1]]


def mlp_forward(theta, widths, offs, x):
    """Forward pass for a batch x of shape (rows, w0) -> (rows, wL)."""
    n_layers = len(widths) - 1
    a = x
    for l in range(n_layers):
        z = np.dot(a, weight_view(theta, widths, offs, l)) + bias_view(theta, widths, offs, l)
        a = np.tanh(z) if l < n_layers - 1 else z
    return a


def mlp_forward_cache(theta, widths, offs, x):
    """Forward pass keeping per-layer inputs for the backward pass.

    Returns (acts, out) where acts[l] is the input fed to layer l
    (acts[0] is x itself) and out is the linear output of the last layer.
    """
    n_layers = len(widths) - 1
    acts = [x]
    a = x
    for l in range(n_layers):
        z = np.dot(a, weight_view(theta, widths, offs, l)) + bias_view(theta, widths, offs, l)
        if l < n_layers - 1:
            a = np.tanh(z)
            acts.append(a)
        else:
            a = z
    return acts, a


def mlp_backward(theta, widths, offs, acts, dout, grad):
    """Reverse pass; writes parameter gradients into ``grad`` (flat, same
    layout as theta) and returns the gradient w.r.t. the input batch."""
    n_layers = len(widths) - 1
    delta = dout
    for l in range(n_layers - 1, -1, -1):
        a_in = acts[l]
        w = weight_view(theta, widths, offs, l)
        gw = weight_view(grad, widths, offs, l)
        gb = bias_view(grad, widths, offs, l)
        gw[:] = np.dot(a_in.T, delta)
        gb[:] = delta.sum(axis=0)
        delta = np.dot(delta, w.T)
        if l > 0:
            delta = delta * (1.0 - a_in * a_in)
    return delta


def combine_features(b_feat, t_feat, n_latent, d_s):
    """Dot-product merge of branch rows and trunk rows.

    b_feat: (nb, n_latent*d_s), t_feat: (nq, n_latent*d_s); feature i of
    output channel c sits at column i*d_s + c. Returns (nb, nq, d_s).
    """
    if d_s == 1:
        return np.dot(b_feat, t_feat.T)[:, :, None]
    nb, nq = b_feat.shape[0], t_feat.shape[0]
    out = np.empty((nb, nq, d_s))
    for c in range(d_s):
        bc = np.ascontiguousarray(b_feat[:, c::d_s])
        tc = np.ascontiguousarray(t_feat[:, c::d_s])
        out[:, :, c] = np.dot(bc, tc.T)
    return out


def rp_loss_grads(
    theta_b, theta_t, prior_b, prior_t,
    widths_b, offs_b, widths_t, offs_t,
    u, y, s, w, beta, n_latent, d_s,
    grad_b, grad_t,
):
    """Loss and gradients of a randomized-prior model over one batch.

    u: (nb, m_in) sensor values, y: (nq, trunk_in) query features,
    s: (nb, nq, d_s) targets, w: (nb,) per-function divisors (ones for the
    unscaled loss, sup-norm squared for the scaled one). Writes gradients
    w.r.t. the trainable parameters only into grad_b / grad_t and returns
    the scalar loss. Priors contribute values, never gradients.
    """
    nb, nq = u.shape[0], y.shape[0]
    acts_b, b_feat = mlp_forward_cache(theta_b, widths_b, offs_b, u)
    acts_t, t_feat = mlp_forward_cache(theta_t, widths_t, offs_t, y)
    if beta == 0.0:
        b_hat, t_hat = b_feat, t_feat
    else:
        b_hat = b_feat + beta * mlp_forward(prior_b, widths_b, offs_b, u)
        t_hat = t_feat + beta * mlp_forward(prior_t, widths_t, offs_t, y)

    pred = combine_features(b_hat, t_hat, n_latent, d_s)
    resid = pred - s
    wcol = w[:, None, None]
    loss = float(np.sum(resid * resid / wcol) / (nb * nq))

    dpred = resid * (2.0 / (nb * nq)) / wcol
    if d_s == 1:
        dp = dpred[:, :, 0]
        db_feat = np.dot(dp, t_hat)
        dt_feat = np.dot(dp.T, b_hat)
    else:
        db_feat = np.zeros_like(b_hat)
        dt_feat = np.zeros_like(t_hat)
        for c in range(d_s):
            dp = np.ascontiguousarray(dpred[:, :, c])
            tc = np.ascontiguousarray(t_hat[:, c::d_s])
            bc = np.ascontiguousarray(b_hat[:, c::d_s])
            db_feat[:, c::d_s] = np.dot(dp, tc)
            dt_feat[:, c::d_s] = np.dot(dp.T, bc)

    mlp_backward(theta_b, widths_b, offs_b, acts_b, db_feat, grad_b)
    mlp_backward(theta_t, widths_t, offs_t, acts_t, dt_feat, grad_t)
    return loss


def adam_update(theta, grad, m, v, t, lr, beta1, beta2, eps):
    """In-place Adam step with bias correction; t is the 1-based step."""
    m *= beta1
    m += (1.0 - beta1) * grad
    v *= beta2
    v += (1.0 - beta2) * (grad * grad)
    bc1 = 1.0 - beta1**t
    bc2 = 1.0 - beta2**t
    theta -= lr * (m / bc1) / (np.sqrt(v / bc2) + eps)


def train_member_chunk(
    theta_b, theta_t, prior_b, prior_t,
    m_b, v_b, m_t, v_t, step0,
    widths_b, offs_b, widths_t, offs_t,
    u_all, y_feat, s_all, w_all,
    func_idx, query_idx, lrs, beta, n_latent, d_s,
    loss_out, record_every,
    adam_beta1, adam_beta2, adam_eps,
):
    """Run a block of training iterations for one ensemble member.

    Mutates theta_b/theta_t and the Adam buffers in place. func_idx and
    query_idx are pre-drawn index matrices of shape (chunk, N_b) and
    (chunk, P); lrs holds the per-iteration learning rate. Losses at
    iterations where (step0 + it) % record_every == 0 are appended to
    loss_out in order. Returns -1 on success, or the local iteration index
    at which the loss turned non-finite.
    """
    grad_b = np.zeros_like(theta_b)
    grad_t = np.zeros_like(theta_t)
    rec = 0
    for it in range(func_idx.shape[0]):
        fi = func_idx[it]
        qi = query_idx[it]
        u = u_all[fi]
        y = y_feat[qi]
        s = s_all[fi][:, qi]
        w = w_all[fi]
        loss = rp_loss_grads(
            theta_b, theta_t, prior_b, prior_t,
            widths_b, offs_b, widths_t, offs_t,
            u, y, s, w, beta, n_latent, d_s, grad_b, grad_t,
        )
        if not np.isfinite(loss):
            return it
        if (step0 + it) % record_every == 0:
            loss_out[rec] = loss
            rec += 1
        t = step0 + it + 1
        adam_update(theta_b, grad_b, m_b, v_b, t, lrs[it], adam_beta1, adam_beta2, adam_eps)
        adam_update(theta_t, grad_t, m_t, v_t, t, lrs[it], adam_beta1, adam_beta2, adam_eps)
    return -1


def predict_member(
    theta_b, theta_t, prior_b, prior_t,
    widths_b, offs_b, widths_t, offs_t,
    u, y_feat, beta, n_latent, d_s,
):
    """Member predictions on a (n_funcs, m_in) x (n_queries, trunk_in)
    grid; returns (n_funcs, n_queries, d_s)."""
    b_feat = mlp_forward(theta_b, widths_b, offs_b, u)
    t_feat = mlp_forward(theta_t, widths_t, offs_t, y_feat)
    if beta != 0.0:
        b_feat = b_feat + beta * mlp_forward(prior_b, widths_b, offs_b, u)
        t_feat = t_feat + beta * mlp_forward(prior_t, widths_t, offs_t, y_feat)
    return combine_features(b_feat, t_feat, n_latent, d_s)
