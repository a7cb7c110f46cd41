"""Password-checker timing side channel.

A bit-by-bit checker compares a 128-bit password against the attacker's
probe (the known 6-bit prefix followed by zeros) and stops at the first
mismatch; the attacker sees the stopping time plus a two-sided geometric
delay, clamped to buckets 1..128 (boundary absorption).  The attacker wants
bit 7, so guesses partition the secrets into two classes: passwords whose
bit 7 agrees with the probe and those that disagree.  The reduction to the
two classes is lossless: the gain depends only on bit 7 and the timing law
only on the first disagreeing position.

Under the partition gain the two pre-processings coincide (beta = 1,
tau = prior, R = identity), so the exact vulnerability is the posterior
Bayes vulnerability of the analytic 2 x 128 reduced channel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..core import (
    Alphabet,
    Channel,
    GainFunction,
    GenerativeChannel,
    Prior,
    ValidationError,
    _require,
    identity_gain,
    posterior_vulnerability,
)
from ..features import scalar_codec
from ..rng import Stream
from . import Scenario

AGREE, DISAGREE = 0, 1


@dataclass(frozen=True)
class PasswordScenarioConfig:
    total_bits: int = 128
    known_prefix: int = 6
    delay_nu: float = 1.0  # math.inf disables the delay

    def __post_init__(self) -> None:
        _require(self.total_bits >= 2, "need at least 2 bits")
        _require(
            0 <= self.known_prefix <= self.total_bits - 2,
            "prefix must leave at least 2 unknown bits",
        )
        _require(self.delay_nu > 0, "delay nu must be positive")

    @property
    def target_bit(self) -> int:
        """1-based index of the first unknown bit (7 in the reference setup)."""
        return self.known_prefix + 1

    @property
    def buckets(self) -> int:
        return self.total_bits


def base_time_law(config: PasswordScenarioConfig) -> np.ndarray:
    """(2, buckets) law of the checker's stop time per bit-7 class, no delay.

    Disagreeing passwords always stop at the target bit.  Agreeing ones stop
    at bit t+j with probability 2^-j (the remaining bits are fair coins) and
    report the full-scan time for a stop at the last bit or a complete match.
    """
    t = config.target_bit
    n = config.buckets
    law = np.zeros((2, n + 1))  # 1-based columns, column 0 unused
    law[DISAGREE, t] = 1.0
    for j in range(1, n - t):
        law[AGREE, t + j] = 2.0 ** -j
    law[AGREE, n] = 2.0 ** -(n - t - 1)  # stop at last bit, or full match
    return law[:, 1:]


def _delay_kernel(config: PasswordScenarioConfig) -> np.ndarray:
    """(buckets, buckets) transition: true time t -> clamped noisy bucket y."""
    n = config.buckets
    if math.isinf(config.delay_nu):
        return np.eye(n)
    nu = config.delay_nu
    q = math.exp(-nu)
    lam = (1.0 - q) / (1.0 + q)
    ts = np.arange(1, n + 1)
    ys = np.arange(1, n + 1)
    kernel = lam * np.power(q, np.abs(ys[None, :] - ts[:, None]))
    # boundary absorption: P(bucket 1) = P(D <= 1 - t) = q^(t-1) / (1 + q)
    # and symmetrically for bucket n; the formulas cover t = 1 and t = n too
    kernel[:, 0] = np.power(q, ts - 1) / (1.0 + q)
    kernel[:, -1] = np.power(q, n - ts) / (1.0 + q)
    return kernel


def reduced_channel(config: PasswordScenarioConfig) -> Channel:
    """Analytic 2 x 128 channel from bit-7 class to observed bucket."""
    rc = base_time_law(config) @ _delay_kernel(config)
    rc /= rc.sum(axis=1, keepdims=True)
    return Channel(
        Alphabet(("agree", "disagree")),
        Alphabet.integers(config.buckets, prefix="t"),
        rc,
    )


def sample_passwords(
    config: PasswordScenarioConfig, count: int, stream: Stream
) -> list[int]:
    """Uniform full passwords (prefix fixed to zero) as Python integers."""
    suffix_bits = config.total_bits - config.known_prefix
    gen = stream.gen
    halves = gen.integers(0, 2**32, size=(count, (suffix_bits + 31) // 32), dtype=np.uint64)
    out = []
    for row in halves:
        value = 0
        for word in row.tolist():
            value = (value << 32) | int(word)
        out.append(value & ((1 << suffix_bits) - 1))
    return out


def password_scenario(
    config: PasswordScenarioConfig = PasswordScenarioConfig(),
) -> tuple[Prior, GenerativeChannel, GainFunction, float]:
    """(class prior, timing sampler, partition gain, exact V_g).

    The sampler simulates the checker honestly on the class-conditioned bit
    law: a geometric draw gives the first mismatch among the fair suffix
    bits, then the delay is added and clamped.  Observables are encoded as
    the 1-based bucket index.
    """
    classes = Alphabet(("agree", "disagree"))
    prior = Prior.uniform(classes)
    t = config.target_bit
    n = config.buckets

    def sampler(xs: np.ndarray, gen: np.random.Generator) -> np.ndarray:
        count = len(xs)
        times = np.full(count, t, dtype=np.int64)
        agree = xs == AGREE
        # first mismatch among the remaining fair bits; a draw beyond the
        # last checkable position means a stop there or a full match
        firsts = gen.geometric(0.5, size=count)
        times[agree] = np.minimum(t + firsts[agree], n)
        if math.isinf(config.delay_nu):
            noisy = times
        else:
            p = 1.0 - math.exp(-config.delay_nu)
            delay = (
                gen.geometric(p, size=count) - gen.geometric(p, size=count)
            ).astype(np.int64)
            noisy = np.clip(times + delay, 1, n)
        return noisy[:, None]

    channel = GenerativeChannel(classes, 1, sampler, name="password-timing")
    gain = identity_gain(classes)
    rc = reduced_channel(config)
    exact = posterior_vulnerability(prior, rc, identity_gain(classes))
    return prior, channel, gain, exact


def build(profile: str = "desk", **overrides) -> Scenario:
    if profile not in ("desk", "paper"):
        raise ValidationError(f"unknown profile {profile!r}")
    config = PasswordScenarioConfig(**overrides)
    prior, channel, gain, exact = password_scenario(config)
    return Scenario(
        name="password",
        prior=prior,
        channel=channel,
        gain=gain,
        exact_vg=exact,
        codec=scalar_codec(
            scale=1.0 / (config.buckets - 1), offset=-1.0 / (config.buckets - 1)
        ),
        metric_kind="absolute",
        details={"delay_nu": config.delay_nu, "target_bit": config.target_bit},
    )
