"""The two reductions from g-vulnerability estimation to Bayes classification.

Data pre-processing turns a set of (secret, observable) samples into a
weighted multiset of (guess, observable) pairs: each (x, y) contributes
g(w, x) copies of (w, y) for every guess w.  Training a Bayes classifier on
the expanded set and evaluating it with the original gain on held-out (x, y)
pairs estimates the posterior g-vulnerability.

Channel pre-processing instead builds, from the prior and the gain alone, a
scalar beta, a prior tau over guesses and a channel R from guesses to
secrets such that V_g(pi, C) = beta * V_gid(tau, RC); training pairs are
sampled as w ~ tau, x ~ R[w], y ~ C[x].
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import (
    Alphabet,
    Channel,
    GainFunction,
    Prior,
    SampleSet,
    ValidationError,
    _freeze,
    _require,
)
from .rng import SeedProvenance

SNAP_DENOMINATOR = 10**6
SNAP_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class WeightedSampleSet:
    """Multiset of (guess, observable, weight) entries.

    Weight k is semantically identical to k physical copies of the pair;
    consumers (k-NN tallies, MLP batch sampling, empirical functionals)
    must honor that equivalence.
    """

    guesses: Alphabet
    ws: np.ndarray
    ys: np.ndarray
    weights: np.ndarray
    provenance: SeedProvenance | None = None

    def __post_init__(self) -> None:
        ws = np.asarray(self.ws, dtype=np.int64)
        ys = np.asarray(self.ys, dtype=np.int64)
        weights = np.asarray(self.weights, dtype=np.int64)
        _require(ws.ndim == 1, "ws must be one-dimensional")
        _require(ys.ndim == 2 and ys.shape[0] == ws.shape[0], "ys shape mismatch")
        _require(weights.shape == ws.shape, "weights shape mismatch")
        _require(ws.size > 0, "weighted sample set is empty")
        _require(bool((weights >= 1).all()), "weights must be >= 1")
        _require(
            0 <= int(ws.min()) and int(ws.max()) < self.guesses.size,
            "guess index out of range",
        )
        object.__setattr__(self, "ws", _freeze(ws))
        object.__setattr__(self, "ys", _freeze(ys))
        object.__setattr__(self, "weights", _freeze(weights))

    @property
    def size(self) -> int:
        return int(self.ws.shape[0])

    @property
    def total_weight(self) -> int:
        return int(self.weights.sum())

    @property
    def obs_width(self) -> int:
        return int(self.ys.shape[1])


@dataclass(frozen=True, eq=False)
class DataPreprocDerivation:
    """Ideal counterpart of data pre-processing: U, alpha, xi, E.

    U(w, y) = sum_x pi_x C[x, y] g(w, x) is the ideal copy proportion,
    alpha its total mass, xi the row marginal of U/alpha, and E the
    normalized rows, so that V_g(pi, C) = alpha * V_gid(xi, E).
    """

    U: np.ndarray
    alpha: float
    xi: Prior
    E: Channel


@dataclass(frozen=True, eq=False)
class ChannelPreprocDerivation:
    """Channel pre-processing triple: V_g(pi, C) = beta * V_gid(tau, RC)."""

    beta: float
    tau: Prior
    R: Channel


def data_preprocess(train: SampleSet, gain: GainFunction) -> WeightedSampleSet:
    """Weighted-copy expansion of a training set under an integer gain.

    Each distinct (x, y) with multiplicity u contributes weight u * g(w, x)
    on (w, y) for every guess w with positive gain.  Raises if the stored
    gain entries are not non-negative integers (rationalize first).
    """
    _require(train.size > 0, "training set is empty")
    if not gain.is_integer_valued():
        raise ValidationError(
            "data pre-processing needs an integer-valued gain; "
            "apply rationalize_gain first"
        )
    g_int = np.round(gain.matrix).astype(np.int64)
    combined = np.concatenate([train.xs[:, None], train.ys], axis=1)
    distinct, counts = np.unique(combined, axis=0, return_counts=True)
    xs_d = distinct[:, 0]
    ys_d = distinct[:, 1:]
    # weights_full[w, p] = multiplicity(p) * g(w, x_p)
    weights_full = counts[None, :] * g_int[:, xs_d]
    w_idx, p_idx = np.nonzero(weights_full)
    if w_idx.size == 0:
        raise ValidationError("gain is zero on every sampled secret")
    return WeightedSampleSet(
        gain.guesses,
        w_idx,
        ys_d[p_idx],
        weights_full[w_idx, p_idx],
        train.provenance,
    )


def rationalize_gain(
    gain: GainFunction, expansion_cap: int = 10**6
) -> tuple[GainFunction, int]:
    """Scale a non-negative rational gain to integers by the denominator lcm.

    Entries are snapped to rationals with denominator <= 10^6; the snap must
    reproduce each entry within 1e-9 or the gain is declared
    non-rationalizable.  Returns (K*G, K); vulnerabilities under K*G are
    exactly K times those under G, so callers de-scale estimates by K (the
    pipelines here avoid that by always evaluating with the original gain).
    Raises when K or the largest scaled entry exceeds ``expansion_cap``
    (fall back to channel pre-processing).
    """
    flat = gain.matrix.ravel()
    fracs = []
    for v in flat.tolist():
        frac = Fraction(v).limit_denominator(SNAP_DENOMINATOR)
        if abs(float(frac) - v) > SNAP_TOL * max(1.0, abs(v)):
            raise ValidationError(
                f"gain entry {v!r} is not a rational with denominator <= "
                f"{SNAP_DENOMINATOR}; cannot rationalize"
            )
        fracs.append(frac)
    scale = math.lcm(*(frac.denominator for frac in fracs)) if fracs else 1
    if scale > expansion_cap:
        raise ValidationError(
            f"denominator lcm {scale} exceeds expansion cap {expansion_cap}; "
            "use channel pre-processing"
        )
    scaled = np.array(
        [int(frac * scale) for frac in fracs], dtype=np.int64
    ).reshape(gain.matrix.shape)
    if scaled.size and int(scaled.max()) > expansion_cap:
        raise ValidationError(
            f"scaled gain entry {int(scaled.max())} exceeds expansion cap "
            f"{expansion_cap}; use channel pre-processing"
        )
    out = GainFunction(gain.guesses, gain.secrets, scaled.astype(np.float64))
    return out, scale


def ideal_derivation(
    prior: Prior, channel: Channel, gain: GainFunction
) -> DataPreprocDerivation:
    """Ideal joint of data pre-processing (U, alpha, xi, E).

    Computed from the stored non-negative gain; when the gain was shifted at
    construction the identity alpha * V_gid(xi, E) = V_g(pi, C) holds for the
    shifted gain, i.e. equals the original-unit value plus the shift.
    """
    _require(channel.input == prior.alphabet, "channel input != prior alphabet")
    _require(gain.secrets == prior.alphabet, "gain secrets != prior alphabet")
    U = (gain.matrix * prior.probs[None, :]) @ channel.rows
    alpha = math.fsum(U.ravel().tolist())
    if alpha <= 0.0:
        raise ValidationError("degenerate input: pi_x * g(w,x) is zero everywhere")
    p_wy = U / alpha
    xi = p_wy.sum(axis=1)
    rows = np.empty_like(p_wy)
    n_y = channel.output.size
    for w in range(gain.guesses.size):
        if xi[w] > 0.0:
            rows[w] = p_wy[w] / xi[w]
        else:
            rows[w] = 1.0 / n_y  # content irrelevant: the guess never occurs
    xi = xi / xi.sum()  # absorb rounding so Prior's 1e-9 check is exact
    return DataPreprocDerivation(
        U=_freeze(U),
        alpha=alpha,
        xi=Prior(gain.guesses, xi),
        E=Channel(gain.guesses, channel.output, _renormalize(rows)),
    )


def channel_preprocess(prior: Prior, gain: GainFunction) -> ChannelPreprocDerivation:
    """(beta, tau, R) from the prior and gain alone (independent of C)."""
    _require(gain.secrets == prior.alphabet, "gain secrets != prior alphabet")
    scores = gain.matrix * prior.probs[None, :]  # (W, X): pi_x g(w, x)
    beta = math.fsum(scores.ravel().tolist())
    if beta <= 0.0:
        raise ValidationError("degenerate input: pi_x * g(w,x) is zero everywhere")
    row_sums = scores.sum(axis=1)
    tau = row_sums / beta
    n_x = prior.alphabet.size
    rows = np.empty_like(scores)
    for w in range(gain.guesses.size):
        if row_sums[w] > 0.0:
            rows[w] = scores[w] / row_sums[w]
        else:
            rows[w] = 1.0 / n_x  # tau_w = 0: any row works, keep it uniform
    return ChannelPreprocDerivation(
        beta=beta,
        tau=Prior(gain.guesses, tau / tau.sum()),
        R=Channel(gain.guesses, prior.alphabet, _renormalize(rows)),
    )


def compose(r: Channel, c: Channel) -> Channel:
    """Matrix product of two channels: (RC)[w, y] = sum_x R[w,x] C[x,y]."""
    _require(r.output == c.input, "inner alphabets do not match")
    return Channel(r.input, c.output, _renormalize(r.rows @ c.rows))


def _renormalize(rows: np.ndarray) -> np.ndarray:
    """Divide rows by their sums to absorb float rounding (sums already ~1)."""
    return rows / rows.sum(axis=1, keepdims=True)
