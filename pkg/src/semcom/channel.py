"""q-ary discrete memoryless channel, decoders and retransmission."""

from __future__ import annotations

import math
import string
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import SemcomError

LETTERS = string.ascii_uppercase

Seed = Union[int, Sequence[int], np.random.SeedSequence, np.random.Generator, None]


def make_rng(seed: Seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


@dataclass(frozen=True)
class ChannelModel:
    """Symbol kept with probability 1 - eps, else replaced by one of the q - 1 others."""

    alphabet_size: int = 26
    epsilon: float = 0.0

    def __post_init__(self) -> None:
        if self.alphabet_size < 2:
            raise ValueError("alphabet needs at least two symbols")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError(f"crossover probability {self.epsilon} outside [0, 1]")

    @property
    def symbol_bits(self) -> float:
        return math.log2(self.alphabet_size)

    def transition_matrix(self) -> np.ndarray:
        q = self.alphabet_size
        m = np.full((q, q), self.epsilon / (q - 1))
        np.fill_diagonal(m, 1.0 - self.epsilon)
        return m


@dataclass(frozen=True)
class KOfN:
    """Decoding succeeds when at least ``k`` symbols arrive uncorrupted."""

    k: int


@dataclass(frozen=True)
class Exact:
    """Decoding needs every symbol intact."""


Decoder = Union[KOfN, Exact]


@dataclass(frozen=True)
class TransmissionLog:
    rounds: int
    symbols_sent: int
    success: bool


class InfiniteCost(SemcomError, ZeroDivisionError):
    pass


def _threshold(dec: Decoder, n: int) -> int:
    k = n if isinstance(dec, Exact) else dec.k
    if k > n:
        raise ValueError(f"decoder needs {k} correct symbols out of only {n}")
    if k < 1 and n > 0:
        raise ValueError("decoder threshold must be at least 1")
    return k


def _as_symbols(ch: ChannelModel, symbols) -> np.ndarray:
    arr = np.asarray(symbols, dtype=np.int64).reshape(-1)
    if arr.size and (arr.min() < 0 or arr.max() >= ch.alphabet_size):
        raise ValueError("symbol outside the channel alphabet")
    return arr


def transmit(ch: ChannelModel, symbols, rng_seed: Seed = None) -> np.ndarray:
    """Pass ``symbols`` through the channel once."""
    sent = _as_symbols(ch, symbols)
    rng = make_rng(rng_seed)
    return _corrupt(ch, sent[None, :], rng)[0]


def _corrupt(ch: ChannelModel, sent: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    flips = rng.random(sent.shape) < ch.epsilon
    # a non-zero offset mod q lands uniformly on one of the other symbols
    offsets = rng.integers(1, ch.alphabet_size, size=sent.shape)
    return np.where(flips, (sent + offsets) % ch.alphabet_size, sent)


def decoded(dec: Decoder, sent, received) -> np.ndarray | bool:
    sent = np.asarray(sent)
    received = np.asarray(received)
    correct = (sent == received).sum(axis=-1)
    return correct >= _threshold(dec, sent.shape[-1])


def success_prob(ch: ChannelModel, n: int, dec: Decoder) -> float:
    """Probability that one transmission of ``n`` symbols decodes."""
    if n < 1:
        raise ValueError("need at least one symbol")
    k = _threshold(dec, n)
    e = ch.epsilon
    return sum(math.comb(n, i) * (1.0 - e) ** i * e ** (n - i) for i in range(k, n + 1))


def expected_symbols(n: int, p_s: float) -> float:
    """Mean symbols spent until success under repeat-until-decoded."""
    if p_s <= 0.0:
        raise InfiniteCost("a transmission that never succeeds has infinite cost")
    if p_s > 1.0:
        raise ValueError("success probability above 1")
    return n / p_s


def simulate_retransmit(ch: ChannelModel, symbols, dec: Decoder, max_rounds: int,
                        rng_seed: Seed = None) -> TransmissionLog:
    """Retransmit until the receiver decodes or ``max_rounds`` is exhausted."""
    if max_rounds < 1:
        raise ValueError("max_rounds must be at least 1")
    sent = _as_symbols(ch, symbols)
    rng = make_rng(rng_seed)
    for r in range(1, max_rounds + 1):
        got = _corrupt(ch, sent[None, :], rng)[0]
        if decoded(dec, sent, got):
            return TransmissionLog(r, r * sent.size, True)
    return TransmissionLog(max_rounds, max_rounds * sent.size, False)


def simulate_retransmit_batch(ch: ChannelModel, symbols, dec: Decoder, runs: int,
                              max_rounds: int = 10**6, rng_seed: Seed = None):
    """Vectorized ``simulate_retransmit`` over independent runs.

    Returns ``(rounds, success)`` arrays of length ``runs``.
    """
    if max_rounds < 1:
        raise ValueError("max_rounds must be at least 1")
    sent = _as_symbols(ch, symbols)
    k = _threshold(dec, sent.size)
    rng = make_rng(rng_seed)
    rounds = np.zeros(runs, dtype=np.int64)
    success = np.zeros(runs, dtype=bool)
    active = np.arange(runs)
    r = 0
    while active.size and r < max_rounds:
        r += 1
        got = _corrupt(ch, np.broadcast_to(sent, (active.size, sent.size)), rng)
        ok = (got == sent).sum(axis=1) >= k
        rounds[active] = r
        success[active[ok]] = True
        active = active[~ok]
    return rounds, success


def decode_error_trials(ch: ChannelModel, symbols, dec: Decoder, runs: int,
                        rng_seed: Seed = None) -> np.ndarray:
    """One transmission per run; True where decoding failed."""
    sent = _as_symbols(ch, symbols)
    rng = make_rng(rng_seed)
    got = _corrupt(ch, np.broadcast_to(sent, (runs, sent.size)), rng)
    return ~decoded(dec, sent, got)


# -- codecs ---------------------------------------------------------------------

def encode_letters(word: str) -> list[int]:
    try:
        return [LETTERS.index(c) for c in word]
    except ValueError:
        raise ValueError(f"{word!r} is not upper-case A-Z text") from None


def decode_letters(symbols) -> str:
    return "".join(LETTERS[int(s)] for s in symbols)


def _digits_per_byte(q: int) -> int:
    return math.ceil(math.log(256) / math.log(q) - 1e-12)


def encode_text(text: str, q: int) -> list[int]:
    """UTF-8 bytes written as fixed-width base-q digit groups."""
    width = _digits_per_byte(q)
    out = []
    for byte in text.encode("utf-8"):
        group = []
        for _ in range(width):
            byte, d = divmod(byte, q)
            group.append(d)
        out.extend(reversed(group))
    return out


def decode_text(symbols, q: int) -> str | None:
    """Inverse of ``encode_text``; ``None`` when the digits are not valid UTF-8."""
    width = _digits_per_byte(q)
    symbols = list(symbols)
    if len(symbols) % width:
        return None
    data = bytearray()
    for i in range(0, len(symbols), width):
        value = 0
        for d in symbols[i:i + width]:
            value = value * q + int(d)
        if value > 255:
            return None
        data.append(value)
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError:
        return None


def reception_trials(text: str, ch_b: ChannelModel, ch_e: ChannelModel, trials: int,
                     seed: Seed = 0):
    """Send program ``text`` to two receivers ``trials`` times.

    Returns two boolean lists: whether each receiver got back a program
    equal to the one sent.
    """
    from .lang import parse_program

    original = parse_program(text)
    seq = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    streams = [np.random.default_rng(s) for s in seq.spawn(2)]
    results = []
    for ch, rng in zip((ch_b, ch_e), streams):
        sent = np.asarray(encode_text(text, ch.alphabet_size))
        got = _corrupt(ch, np.broadcast_to(sent, (trials, sent.size)), rng)
        same = (got == sent).all(axis=1)
        intact = []
        for row, clean in zip(got, same):
            if clean:
                intact.append(True)
                continue
            received = decode_text(row, ch.alphabet_size)
            try:
                intact.append(received is not None and parse_program(received) == original)
            except ValueError:
                intact.append(False)
        results.append(intact)
    return results[0], results[1]
