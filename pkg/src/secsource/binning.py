"""Desk-scale random-binning codec: layered bin assignments, one-time-pad key
mixing, successive Slepian-Wolf decoding, and empirical reliability /
distortion / leakage measurements.

Code construction
-----------------
Every v-sequence gets two i.i.d. uniform bin indices (F_v public, W_v
transmitted); every u-sequence gets three (F_u public, W_u transmitted, K_u
the key-slot bin).  Bin rates follow the standard output-statistics choices:

    rv_tilde = H(V|Xt) - eps            rv = I(V;Xt) - I(V;Y) + 2 eps
    ru_tilde = H(U|V,Xt) - eps          r0 + ru = I(U;Xt|V) - I(U;Y|V) + 2 eps

(all clamped at zero; index sets have 2^ceil(n * rate) elements).  The
transmitted message is (W_v, W_u, K + K_u) with the key added modulo the
key-slot size.  With key rate at least I(U;Xt|V) - I(U;Y|V) + 2 eps the K_u
slot is dropped and W_u itself is one-time padded; with key rate at least
I(U;Xt) - I(U;Y) + 4 eps both W_v and W_u are padded and the transmitted
message is exactly uniform and independent of everything.

Decoding and the two simulation engines
---------------------------------------
Decoding is maximum likelihood within the received bin, layer by layer
(V from y, then U from (v, y)); ambiguity counts as failure.  A literal
in-bin search touches the whole sequence space, so it is only available when
the space is enumerable ("explicit" engine; bins are materialized arrays).
At larger blocklengths ``run_experiment`` switches to the "collision" engine:
it counts the sequences at least as likely as the truth with an exact
composition-type enumeration, and samples the event "some such competitor
shares the transmitted bin" from its exact Binomial law (bins are i.i.d.
uniform and independent of everything else).  That reproduces the ML-in-bin
error event exactly in distribution, with fresh bin randomness per trial,
i.e. the reported error rate estimates the expectation over random bin
assignments - the quantity the achievability analysis controls.

Leakage reporting
-----------------
In the fully padded regime the transmitted message is uniform and
independent of the source by construction, so leakage is exactly zero.
Otherwise the report carries plug-in estimates: the single-letter leakage
functionals evaluated on the pooled empirical type of the per-position
tuples (v, u, xt, x, y, z), minus the key rate actually consumed, clamped at
zero.  These indicate the asymptotic targets and are not finite-n proofs;
``exact_leakage`` computes the exact finite-n conditional mutual informations
by enumeration for small blocklengths.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from functools import lru_cache, reduce
from typing import Literal, Optional, Sequence

import numpy as np
from scipy.special import gammaln, logsumexp

from .probability import (
    AX_U,
    AX_V,
    AX_X,
    AX_XT,
    AX_Y,
    AX_Z,
    DimensionError,
    JointPmf,
    ModelError,
    SourceModel,
)
from .regions import DistortionMetric, VU_AXES, _optimal_reconstruction_from_uxty

PadMode = Literal["key_slot", "pad_u", "pad_all"]

MATERIALIZE_LIMIT = 1 << 14   # largest sequence space kept as explicit tables
ENUMERATION_BUDGET = 5_000_000  # cells in composition cross-products / exact sums
_LL_TIE_TOL = 1e-6            # log-likelihood slack treated as a tie


class BinningScaleError(RuntimeError):
    """The requested exact computation exceeds the desk-scale budget."""


class DecodeSearchError(RuntimeError):
    """In-bin ML search needs materialized bins (sequence space too large)."""


@dataclass(frozen=True)
class BinningRates:
    """Bin rates in bits/symbol (before index-size ceiling)."""

    rv_tilde: float
    rv: float
    ru_tilde: float
    ru: float
    r0: float


@dataclass(frozen=True)
class IndexBits:
    """Bit widths of the index sets, after ceil(n * rate)."""

    f_v: int
    w_v: int
    f_u: int
    w_u: int
    k_u: int

    def u_layer_total(self) -> int:
        return self.f_u + self.w_u + self.k_u


@dataclass(frozen=True)
class Message:
    """One transmitted message: public indices F and padded/raw W components.

    ``key_slot`` carries (K + K_u) mod 2^bits in the key-slot regime and is
    None otherwise; in the padded regimes w_u (and w_v) are already mixed
    with the key.
    """

    f_v: int
    w_v: int
    f_u: int
    w_u: int
    key_slot: Optional[int]


@dataclass(frozen=True)
class SimulationReport:
    """Aggregated empirical outcomes of repeated encode/decode trials."""

    n: int
    trials: int
    error_rate: float
    distortion: float
    leak_secrecy: float
    leak_privacy: float
    key_rate_used: float
    engine: str


@dataclass(frozen=True)
class BinningCode:
    """A concrete layered binning code (alphabets, rates, bins, key handling).

    ``tables`` holds the materialized i.i.d. uniform bin assignments when the
    sequence spaces are enumerable (index order: sequence digits big-endian);
    otherwise bins are evaluated lazily through a seeded extendable-output
    hash, which stands in for i.i.d. uniform assignments.
    """

    n: int
    v_size: int
    u_size: int
    rates: BinningRates
    bits: IndexBits
    mode: PadMode
    seed: int
    p_u_given_xtilde: np.ndarray   # (Xt, U)
    p_v_given_u: np.ndarray        # (U, V)
    reconstruction: np.ndarray     # (U, Y) -> xhat
    p_v_y: np.ndarray              # per-letter joint (V, Y)
    p_vu_y: np.ndarray             # per-letter joint (V, U, Y)
    sw_v_ok: bool
    sw_u_ok: bool
    tables: Optional[tuple[np.ndarray, ...]] = None  # (f_v, w_v, f_u, w_u, k_u)

    # -- index plumbing -----------------------------------------------------

    @property
    def materialized(self) -> bool:
        return self.tables is not None

    def key_bit_widths(self) -> tuple[int, ...]:
        if self.mode == "key_slot":
            return (self.bits.k_u,)
        if self.mode == "pad_u":
            return (self.bits.w_u,)
        return (self.bits.w_v, self.bits.w_u)

    def key_rate_used(self) -> float:
        return sum(self.key_bit_widths()) / self.n

    def message_bits(self) -> int:
        """Transmitted payload width: W_v, W_u and the key slot when present."""
        extra = self.bits.k_u if self.mode == "key_slot" else 0
        return self.bits.w_v + self.bits.w_u + extra

    def draw_key(self, rng: np.random.Generator) -> tuple[int, ...]:
        return tuple(_rand_bits(rng, b) for b in self.key_bit_widths())

    def v_bins(self, seq: np.ndarray) -> tuple[int, int]:
        if self.materialized:
            i = _seq_index(seq, self.v_size)
            return int(self.tables[0][i]), int(self.tables[1][i])
        return (
            _hash_bits(self.seed, b"Fv", seq, self.bits.f_v),
            _hash_bits(self.seed, b"Wv", seq, self.bits.w_v),
        )

    def u_bins(self, seq: np.ndarray) -> tuple[int, int, int]:
        if self.materialized:
            i = _seq_index(seq, self.u_size)
            return (
                int(self.tables[2][i]),
                int(self.tables[3][i]),
                int(self.tables[4][i]),
            )
        return (
            _hash_bits(self.seed, b"Fu", seq, self.bits.f_u),
            _hash_bits(self.seed, b"Wu", seq, self.bits.w_u),
            _hash_bits(self.seed, b"Ku", seq, self.bits.k_u),
        )


def _rand_bits(rng: np.random.Generator, bits: int) -> int:
    if bits == 0:
        return 0
    value = 0
    remaining = bits
    while remaining > 0:
        take = min(remaining, 32)
        value = (value << take) | int(rng.integers(0, 1 << take))
        remaining -= take
    return value


def _seq_index(seq: np.ndarray, q: int) -> int:
    idx = 0
    for s in np.asarray(seq, dtype=int):
        idx = idx * q + int(s)
    return idx


def _hash_bits(seed: int, tag: bytes, seq: np.ndarray, bits: int) -> int:
    if bits == 0:
        return 0
    h = hashlib.shake_256()
    h.update(seed.to_bytes(8, "big", signed=True))
    h.update(tag)
    h.update(np.asarray(seq, dtype=np.uint8).tobytes())
    raw = int.from_bytes(h.digest((bits + 7) // 8), "big")
    return raw & ((1 << bits) - 1)


@lru_cache(maxsize=16)
def _all_sequences(q: int, n: int) -> np.ndarray:
    """All q-ary length-n sequences, row index = big-endian digit value."""
    if q**n > MATERIALIZE_LIMIT:
        raise BinningScaleError(f"sequence space {q}^{n} exceeds the enumeration limit")
    grids = np.meshgrid(*([np.arange(q)] * n), indexing="ij")
    return np.stack(grids, axis=-1).reshape(-1, n)


def _ceil_bits(n: int, rate: float) -> int:
    if rate <= 0.0:
        return 0
    return max(0, math.ceil(n * rate - 1e-9))


# ---------------------------------------------------------------------------
# Code design
# ---------------------------------------------------------------------------


def design_code(
    full: JointPmf,
    n: int,
    epsilon: float,
    r0: float,
    seed: int = 0,
    metric: Optional[DistortionMetric] = None,
    reconstruction: Optional[np.ndarray] = None,
    rate_override: Optional[BinningRates] = None,
) -> BinningCode:
    """Design a layered binning code for the single-letter law ``full``.

    ``full`` must carry axes (V, U, Xt, X, Y, Z) with the chain
    V - U - Xt - X - (Y, Z).  The reconstruction map is taken from
    ``reconstruction`` if given, computed distortion-optimally from ``metric``
    if given, and defaults to xhat = u when |U| matches |Xt| (the lossless
    choice).  ``rate_override`` substitutes explicit rates for the standard
    epsilon-slack choices (useful for deliberately violating the decodability
    conditions); the pad regime is still selected from r0 and epsilon.
    """
    if full.names != VU_AXES:
        raise DimensionError(f"design_code expects axes {VU_AXES}, got {full.names}")
    if n < 1:
        raise ValueError("blocklength n must be >= 1")
    if epsilon <= 0.0:
        raise ValueError("epsilon must be > 0")
    if r0 < 0.0:
        raise ValueError("r0 must be >= 0")

    v_size = full.size_of(AX_V)
    u_size = full.size_of(AX_U)
    if max(v_size, u_size, full.size_of(AX_Y)) > 255:
        raise BinningScaleError("alphabets beyond 255 symbols are not supported")

    h_v_given_xt = full.entropy((AX_V, AX_XT)) - full.entropy((AX_XT,))
    i_v_xt = full.mutual_information((AX_V,), (AX_XT,))
    i_v_y = full.mutual_information((AX_V,), (AX_Y,))
    h_u_given_vxt = full.entropy((AX_U, AX_V, AX_XT)) - full.entropy((AX_V, AX_XT))
    combined = full.mutual_information((AX_U,), (AX_XT,), (AX_V,)) - full.mutual_information(
        (AX_U,), (AX_Y,), (AX_V,)
    )
    i_u_xt = full.mutual_information((AX_U,), (AX_XT,))
    i_u_y = full.mutual_information((AX_U,), (AX_Y,))

    if r0 >= i_u_xt - i_u_y + 4.0 * epsilon:
        mode: PadMode = "pad_all"
        ru = max(0.0, combined + 2.0 * epsilon)
    elif r0 >= combined + 2.0 * epsilon:
        mode = "pad_u"
        ru = max(0.0, combined + 2.0 * epsilon)
    else:
        mode = "key_slot"
        ru = max(0.0, combined + 2.0 * epsilon - r0)

    # Degenerate layers collapse to a single bin: the epsilon slack only
    # matters for layers that carry anything at all.
    h_v = full.entropy((AX_V,))
    h_u_given_v = full.entropy((AX_U, AX_V)) - h_v
    v_degenerate = h_v <= 1e-12
    u_degenerate = h_u_given_v <= 1e-12

    rates = rate_override if rate_override is not None else BinningRates(
        rv_tilde=0.0 if v_degenerate else max(0.0, h_v_given_xt - epsilon),
        rv=0.0 if v_degenerate else max(0.0, i_v_xt - i_v_y + 2.0 * epsilon),
        ru_tilde=0.0 if u_degenerate else max(0.0, h_u_given_vxt - epsilon),
        ru=0.0 if u_degenerate else ru,
        r0=r0,
    )

    bits = IndexBits(
        f_v=_ceil_bits(n, rates.rv_tilde),
        w_v=_ceil_bits(n, rates.rv),
        f_u=_ceil_bits(n, rates.ru_tilde),
        w_u=_ceil_bits(n, rates.ru),
        k_u=_ceil_bits(n, rates.r0) if mode == "key_slot" else 0,
    )

    # Decodability conditions; a zero-entropy layer is trivially decodable.
    h_v_given_y = full.entropy((AX_V, AX_Y)) - full.entropy((AX_Y,))
    h_u_given_vy = full.entropy((AX_U, AX_V, AX_Y)) - full.entropy((AX_V, AX_Y))
    key_help = rates.r0 if mode == "key_slot" else 0.0
    sw_v_ok = h_v_given_y <= 1e-12 or rates.rv_tilde + rates.rv > h_v_given_y
    sw_u_ok = (
        h_u_given_vy <= 1e-12
        or rates.ru_tilde + rates.ru + key_help > h_u_given_vy
    )

    p_u_given_xt = _conditional(full.marginal_table_ordered((AX_XT, AX_U)))
    p_v_given_u = _conditional(full.marginal_table_ordered((AX_U, AX_V)))

    if reconstruction is not None:
        recon = np.array(reconstruction, dtype=int)
        if recon.shape != (u_size, full.size_of(AX_Y)):
            raise DimensionError("reconstruction map must be (|U|, |Y|)")
    elif metric is not None:
        p_u_xt_y = full.marginal_table((AX_U, AX_XT, AX_Y))
        recon, _ = _optimal_reconstruction_from_uxty(p_u_xt_y, metric)
        recon = np.array(recon, dtype=int)
    elif u_size == full.size_of(AX_XT):
        recon = np.tile(np.arange(u_size)[:, None], (1, full.size_of(AX_Y)))
    else:
        raise ModelError(
            "no reconstruction map: pass `reconstruction` or `metric` when |U| != |Xt|"
        )

    tables = None
    max_bits = max(bits.f_v, bits.w_v, bits.f_u, bits.w_u, bits.k_u)
    if v_size**n <= MATERIALIZE_LIMIT and u_size**n <= MATERIALIZE_LIMIT and max_bits <= 62:
        streams = []
        for tag, width, space in (
            (1, bits.f_v, v_size**n),
            (2, bits.w_v, v_size**n),
            (3, bits.f_u, u_size**n),
            (4, bits.w_u, u_size**n),
            (5, bits.k_u, u_size**n),
        ):
            rng = np.random.default_rng([seed, tag])
            streams.append(rng.integers(0, 1 << width, size=space, dtype=np.int64)
                           if width > 0 else np.zeros(space, dtype=np.int64))
        tables = tuple(streams)

    return BinningCode(
        n=n,
        v_size=v_size,
        u_size=u_size,
        rates=rates,
        bits=bits,
        mode=mode,
        seed=seed,
        p_u_given_xtilde=p_u_given_xt,
        p_v_given_u=p_v_given_u,
        reconstruction=recon,
        p_v_y=full.marginal_table((AX_V, AX_Y)),
        p_vu_y=full.marginal_table((AX_V, AX_U, AX_Y)),
        sw_v_ok=sw_v_ok,
        sw_u_ok=sw_u_ok,
        tables=tables,
    )


def _conditional(joint_2d: np.ndarray) -> np.ndarray:
    """Rows P(col | row); zero-probability rows become uniform."""
    totals = joint_2d.sum(axis=1, keepdims=True)
    out = np.where(totals > 0.0, joint_2d / np.where(totals == 0.0, 1.0, totals), 1.0 / joint_2d.shape[1])
    return out


# ---------------------------------------------------------------------------
# Encoding / decoding
# ---------------------------------------------------------------------------


def _sample_categorical(rows: np.ndarray, labels: np.ndarray, rng) -> np.ndarray:
    cum = np.cumsum(rows, axis=1)
    draws = rng.random(labels.size)
    idx = (draws[:, None] >= cum[labels]).sum(axis=1)
    return np.minimum(idx, rows.shape[1] - 1)


def _sample_aux(code: BinningCode, xtilde_seq: np.ndarray, rng) -> tuple[np.ndarray, np.ndarray]:
    u = _sample_categorical(code.p_u_given_xtilde, xtilde_seq, rng)
    v = _sample_categorical(code.p_v_given_u, u, rng)
    return v, u


def _pad(value: int, key: int, bits: int) -> int:
    return (value + key) & ((1 << bits) - 1) if bits > 0 else 0


def _unpad(value: int, key: int, bits: int) -> int:
    return (value - key) & ((1 << bits) - 1) if bits > 0 else 0


def _assemble_message(code: BinningCode, v_seq, u_seq, key) -> Message:
    f_v, w_v = code.v_bins(v_seq)
    f_u, w_u, k_u = code.u_bins(u_seq)
    if code.mode == "key_slot":
        return Message(f_v, w_v, f_u, w_u, _pad(k_u, key[0], code.bits.k_u))
    if code.mode == "pad_u":
        return Message(f_v, w_v, f_u, _pad(w_u, key[0], code.bits.w_u), None)
    return Message(
        f_v,
        _pad(w_v, key[0], code.bits.w_v),
        f_u,
        _pad(w_u, key[1], code.bits.w_u),
        None,
    )


def encode(
    code: BinningCode, xtilde_seq: Sequence[int], key: tuple[int, ...], seed: int = 0
) -> Message:
    """Sample the auxiliary layers for one source block and emit the message.

    The layers (V^n, U^n) are drawn by forward per-letter sampling from the
    auxiliary channels (the public indices are then read off the sampled
    sequences), and the key is mixed into the slot dictated by the pad
    regime.
    """
    xt = np.asarray(xtilde_seq, dtype=int)
    if xt.size != code.n:
        raise DimensionError(f"sequence length {xt.size} != blocklength {code.n}")
    _check_key(code, key)
    rng = np.random.default_rng(seed)
    v_seq, u_seq = _sample_aux(code, xt, rng)
    return _assemble_message(code, v_seq, u_seq, key)


def _check_key(code: BinningCode, key: tuple[int, ...]) -> None:
    widths = code.key_bit_widths()
    if len(key) != len(widths):
        raise ValueError(f"key must have {len(widths)} component(s)")
    for k, b in zip(key, widths):
        if not 0 <= k < (1 << b):
            raise ValueError("key component out of range")


def _log_conditional(joint: np.ndarray, cond_axes_last: int) -> np.ndarray:
    """Natural-log P(first axes | trailing axes), -inf for impossible cells."""
    denom = joint.sum(axis=tuple(range(joint.ndim - cond_axes_last)), keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.log(np.where(joint > 0.0, joint, 0.0)) - np.log(
            np.where(denom > 0.0, denom, 1.0)
        )
    out[joint <= 0.0] = -np.inf
    return out


def _unpad_targets(code: BinningCode, key: tuple[int, ...], message: Message):
    """Raw (w_v, w_u, k_u) bin indices the decoder searches for."""
    if code.mode == "key_slot":
        return message.w_v, message.w_u, _unpad(message.key_slot, key[0], code.bits.k_u)
    if code.mode == "pad_u":
        return message.w_v, _unpad(message.w_u, key[0], code.bits.w_u), 0
    return (
        _unpad(message.w_v, key[0], code.bits.w_v),
        _unpad(message.w_u, key[1], code.bits.w_u),
        0,
    )


def _decode_layers(
    code: BinningCode, y: np.ndarray, key: tuple[int, ...], message: Message
) -> tuple[np.ndarray, np.ndarray, bool]:
    """Successive ML-in-bin layer decisions; returns (v_hat, u_hat, unique)."""
    w_v_target, w_u_target, k_u_target = _unpad_targets(code, key, message)

    log_v = _log_conditional(code.p_v_y, 1)          # (V, Y)
    v_hat, ok_v = _ml_in_bin(
        _all_sequences(code.v_size, code.n),
        log_v[:, y].T,                               # (n, V)
        (code.tables[0] == message.f_v) & (code.tables[1] == w_v_target),
    )

    log_u = _log_conditional(np.moveaxis(code.p_vu_y, 1, 0), 2)  # (U, V, Y)
    mask_u = (
        (code.tables[2] == message.f_u)
        & (code.tables[3] == w_u_target)
        & (code.tables[4] == k_u_target)
    )
    u_hat, ok_u = _ml_in_bin(
        _all_sequences(code.u_size, code.n),
        log_u[:, v_hat, y].T,                        # (n, U)
        mask_u,
    )
    return v_hat, u_hat, bool(ok_v and ok_u)


def decode(
    code: BinningCode,
    y_seq: Sequence[int],
    key: tuple[int, ...],
    message: Message,
) -> tuple[np.ndarray, bool]:
    """Successive maximum-likelihood-in-bin decoding.

    Recovers the most likely v^n in the received V bin given y^n, then the
    most likely u^n in the received U bin given (v^n, y^n), and maps through
    the reconstruction.  ``success`` is False on an empty candidate set or a
    likelihood tie; the output is then best effort.  Requires materialized
    bins (the in-bin search enumerates the sequence space).
    """
    if not code.materialized:
        raise DecodeSearchError(
            "in-bin ML search needs an enumerable sequence space; "
            "use run_experiment, whose collision engine reproduces the same "
            "decoder exactly in distribution at large blocklengths"
        )
    y = np.asarray(y_seq, dtype=int)
    if y.size != code.n:
        raise DimensionError(f"sequence length {y.size} != blocklength {code.n}")
    _check_key(code, key)
    v_hat, u_hat, unique = _decode_layers(code, y, key, message)
    return code.reconstruction[u_hat, y], unique


def _ml_in_bin(
    seqs: np.ndarray, per_pos_logp: np.ndarray, in_bin: np.ndarray
) -> tuple[np.ndarray, bool]:
    """Pick the most likely sequence among those whose bins match."""
    n = seqs.shape[1]
    candidates = np.nonzero(in_bin)[0]
    if candidates.size == 0:
        # Best effort: per-letter MAP, ignoring the bin.
        return np.argmax(per_pos_logp, axis=1), False
    cols = np.arange(n)
    ll = per_pos_logp[cols[None, :], seqs[candidates]].sum(axis=1)
    order = np.argmax(ll)
    best = ll[order]
    unique = np.count_nonzero(ll >= best - _LL_TIE_TOL) == 1 and math.isfinite(best)
    return seqs[candidates[order]], bool(unique)


# ---------------------------------------------------------------------------
# Collision engine: exact-in-distribution ML-in-bin success sampling
# ---------------------------------------------------------------------------


def _compositions(total: int, parts: int) -> np.ndarray:
    if parts == 1:
        return np.array([[total]], dtype=np.int64)
    rows = []
    for k in range(total + 1):
        rest = _compositions(total - k, parts - 1)
        rows.append(np.column_stack([np.full(len(rest), k, dtype=np.int64), rest]))
    return np.vstack(rows)


def log2_competitor_count(
    per_pos_logp: np.ndarray, true_seq: np.ndarray, groups: np.ndarray
) -> float:
    """log2 of the number of sequences at least as likely as the truth.

    ``per_pos_logp[g]`` is the per-symbol log-probability vector of group g
    (positions sharing the same side-information symbol form a group);
    ``groups[i]`` labels position i.  Counts by enumerating composition types
    per group and crossing the groups, which is exact; the count includes the
    true sequence itself.
    """
    n_groups = per_pos_logp.shape[0]
    q = per_pos_logp.shape[1]
    true_ll = 0.0
    for g, a in zip(groups, true_seq):
        true_ll += per_pos_logp[g, a]
    if not math.isfinite(true_ll):
        raise ValueError("the true sequence must have positive probability")

    lls = np.zeros(1)
    logcounts = np.zeros(1)
    budget = ENUMERATION_BUDGET
    for g in range(n_groups):
        n_g = int(np.count_nonzero(groups == g))
        if n_g == 0:
            continue
        comps = _compositions(n_g, q)
        lp = per_pos_logp[g]
        terms = np.where(comps > 0, comps * lp[None, :], 0.0)
        ll_g = terms.sum(axis=1)
        ll_g[np.any((comps > 0) & np.isneginf(lp)[None, :], axis=1)] = -np.inf
        logcnt_g = gammaln(n_g + 1) - gammaln(comps + 1).sum(axis=1)
        if lls.size * ll_g.size > budget:
            raise BinningScaleError(
                "composition enumeration exceeds the desk-scale budget "
                "(too many side-information groups or too large an alphabet)"
            )
        lls = (lls[:, None] + ll_g[None, :]).ravel()
        logcounts = (logcounts[:, None] + logcnt_g[None, :]).ravel()

    mask = lls >= true_ll - _LL_TIE_TOL
    return float(logsumexp(logcounts[mask]) / math.log(2.0))


def collision_free_probability(log2_count_including_truth: float, bits: int) -> float:
    """P(no competitor lands in the transmitted bin) for i.i.d. uniform bins.

    The competitor count N is the at-least-as-likely count minus the truth;
    the probability is (1 - 2^-bits)^N.
    """
    log2n = log2_count_including_truth
    if log2n <= 1e-12:
        return 1.0  # truth only
    # log2(N - 1) from log2(N)
    if log2n < 50.0:
        n_comp = 2.0**log2n - 1.0
        if n_comp <= 0.0:
            return 1.0
        log2_comp = math.log2(n_comp)
    else:
        n_comp = math.inf
        log2_comp = log2n
    if bits == 0:
        return 0.0
    r = log2_comp - bits
    if r > 40.0:
        return 0.0
    if r < -40.0:
        return 1.0
    if math.isfinite(n_comp) and n_comp < 2.0**50:
        base = math.log1p(-(2.0**-bits)) if bits < 1070 else -(2.0**-bits)
        return math.exp(n_comp * base)
    return math.exp(-math.log(2.0) * 2.0**r)


def _group_labels(*symbol_seqs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Composite side-information labels -> dense group ids."""
    stacked = np.stack(symbol_seqs, axis=1)
    uniq, inverse = np.unique(stacked, axis=0, return_inverse=True)
    return uniq, inverse


def _layer_success_probability(
    code: BinningCode,
    layer: Literal["v", "u"],
    true_seq: np.ndarray,
    v_seq: Optional[np.ndarray],
    y_seq: np.ndarray,
) -> float:
    if layer == "v":
        if code.v_size == 1:
            return 1.0
        log_v = _log_conditional(code.p_v_y, 1)  # (V, Y)
        uniq, groups = _group_labels(y_seq)
        table = log_v[:, uniq[:, 0]].T  # (groups, V)
        log2n = log2_competitor_count(table, true_seq, groups)
        return collision_free_probability(log2n, code.bits.f_v + code.bits.w_v)
    if code.u_size == 1:
        return 1.0
    log_u = _log_conditional(np.moveaxis(code.p_vu_y, 1, 0), 2)  # (U, V, Y)
    uniq, groups = _group_labels(v_seq, y_seq)
    table = log_u[:, uniq[:, 0], uniq[:, 1]].T  # (groups, U)
    log2n = log2_competitor_count(table, true_seq, groups)
    return collision_free_probability(log2n, code.bits.u_layer_total())


# ---------------------------------------------------------------------------
# Experiments
# ---------------------------------------------------------------------------


def _sample_source_block(model: SourceModel, n: int, rng):
    x = _sample_categorical(np.tile(model.px.probs, (1, 1)), np.zeros(n, dtype=int), rng)
    xt = _sample_categorical(model.meas_enc.rows, x, rng)
    yz = _sample_categorical(model.meas_dec_eve.rows, x, rng)
    y, z = np.divmod(yz, model.z_size)
    return xt, x, y, z


def run_experiment(
    code: BinningCode,
    model: SourceModel,
    trials: int,
    seed: int = 0,
    metric: Optional[DistortionMetric] = None,
) -> SimulationReport:
    """Repeated encode/decode trials with empirical reliability and leakage.

    Per trial an i.i.d. source block and a fresh uniform key are drawn.  With
    materialized bins the explicit encoder/decoder runs; otherwise the
    collision engine samples the exact ML-in-bin success event (see module
    docstring).  ``error_rate`` is the fraction of trials whose layers did
    not decode to the true sequences; ``distortion`` averages the per-letter
    metric over the successfully decoded trials (NaN if none succeeded;
    Hamming on the Xt alphabet by default).
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if model.xtilde_size != code.p_u_given_xtilde.shape[0]:
        raise DimensionError("model Xt alphabet does not match the code")
    metric = metric if metric is not None else DistortionMetric.hamming(model.xtilde_size)

    engine = "explicit" if code.materialized else "collision"
    sizes = (
        code.v_size,
        code.u_size,
        model.xtilde_size,
        model.x_size,
        model.y_size,
        model.z_size,
    )
    counts = np.zeros(sizes)
    errors = 0
    distortions: list[float] = []

    for t in range(trials):
        rng = np.random.default_rng([seed, 7, t])
        xt, x, y, z = _sample_source_block(model, code.n, rng)
        key = code.draw_key(rng)
        v_seq, u_seq = _sample_aux(code, xt, rng)
        np.add.at(counts, (v_seq, u_seq, xt, x, y, z), 1.0)

        if engine == "explicit":
            msg = _assemble_message(code, v_seq, u_seq, key)
            v_hat, u_hat, unique = _decode_layers(code, y, key, msg)
            ok = unique and np.array_equal(v_hat, v_seq) and np.array_equal(u_hat, u_seq)
        else:
            p_v = _layer_success_probability(code, "v", v_seq, None, y)
            ok = bool(rng.random() < p_v)
            if ok:
                p_u = _layer_success_probability(code, "u", u_seq, v_seq, y)
                ok = bool(rng.random() < p_u)
        if ok:
            xhat = code.reconstruction[u_seq, y]
            distortions.append(float(metric.table[xt, xhat].mean()))
        else:
            errors += 1

    leak_s, leak_p = _plugin_leakage(code, counts / counts.sum())
    return SimulationReport(
        n=code.n,
        trials=trials,
        error_rate=errors / trials,
        distortion=float(np.mean(distortions)) if distortions else float("nan"),
        leak_secrecy=leak_s,
        leak_privacy=leak_p,
        key_rate_used=code.key_rate_used(),
        engine=engine,
    )


def _plugin_leakage(code: BinningCode, emp_table: np.ndarray) -> tuple[float, float]:
    emp = JointPmf(VU_AXES, emp_table)
    if code.mode == "pad_all":
        return 0.0, 0.0
    if code.mode == "pad_u":
        return (
            max(0.0, emp.mutual_information((AX_V,), (AX_XT,), (AX_Z,))),
            max(0.0, emp.mutual_information((AX_V,), (AX_X,), (AX_Z,))),
        )
    rp = min(
        0.0,
        emp.mutual_information((AX_U,), (AX_Z,), (AX_V,))
        - emp.mutual_information((AX_U,), (AX_Y,), (AX_V,)),
    )
    key_rate = code.bits.k_u / code.n
    leak_s = max(0.0, emp.mutual_information((AX_U,), (AX_XT,), (AX_Z,)) + rp - key_rate)
    leak_p = max(0.0, emp.mutual_information((AX_U,), (AX_X,), (AX_Z,)) + rp - key_rate)
    return leak_s, leak_p


# ---------------------------------------------------------------------------
# Exact small-blocklength analysis
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExactMessageTable:
    """P(message | xt-sequence) by full enumeration of a materialized code."""

    p_sequence: np.ndarray            # P(xt^n), length |Xt|^n
    p_message_given_sequence: np.ndarray  # (|Xt|^n, n_messages)
    messages: list[tuple]


def exact_message_table(code: BinningCode, model: SourceModel) -> ExactMessageTable:
    """Enumerate the exact conditional law of the transmitted message.

    Sums over the auxiliary sampling (support of P(V,U|Xt) per letter) and
    over all keys; feasible for deterministic auxiliaries or tiny
    blocklengths (budget-guarded).
    """
    if not code.materialized:
        raise BinningScaleError("exact enumeration needs a materialized code")
    q = model.xtilde_size
    n = code.n
    seqs = _all_sequences(q, n)
    p_xt_letter = model.px.probs @ model.meas_enc.rows
    p_seq = np.prod(p_xt_letter[seqs], axis=1)

    # Per-letter support of (u, v) given xt.
    joint_uv_given_xt = np.einsum("au,uv->avu", code.p_u_given_xtilde, code.p_v_given_u)
    supports: list[list[tuple[int, int, float]]] = []
    for a in range(q):
        entries = [
            (v, u, float(joint_uv_given_xt[a, v, u]))
            for v in range(code.v_size)
            for u in range(code.u_size)
            if joint_uv_given_xt[a, v, u] > 0.0
        ]
        supports.append(entries)

    key_widths = code.key_bit_widths()
    n_keys = 1
    for b in key_widths:
        n_keys <<= b
    max_support = max(len(s) for s in supports)
    if p_seq.size * (max_support**n) * n_keys > ENUMERATION_BUDGET:
        raise BinningScaleError("exact message enumeration exceeds the budget")

    columns: dict[tuple, int] = {}
    rows: list[dict[int, float]] = [dict() for _ in range(p_seq.size)]

    def all_keys():
        if len(key_widths) == 1:
            for k in range(1 << key_widths[0]):
                yield (k,)
        else:
            for k0 in range(1 << key_widths[0]):
                for k1 in range(1 << key_widths[1]):
                    yield (k0, k1)

    keys = list(all_keys())
    key_p = 1.0 / len(keys)

    for s_idx, xt in enumerate(seqs):
        paths: list[tuple[np.ndarray, np.ndarray, float]] = [
            (np.empty(0, dtype=int), np.empty(0, dtype=int), 1.0)
        ]
        for a in xt:
            new_paths = []
            for v_part, u_part, p in paths:
                for v, u, pv in supports[a]:
                    new_paths.append(
                        (np.append(v_part, v), np.append(u_part, u), p * pv)
                    )
            paths = new_paths
        for v_seq, u_seq, p_path in paths:
            for key in keys:
                msg = _assemble_message(code, v_seq, u_seq, key)
                tup = (msg.f_v, msg.w_v, msg.f_u, msg.w_u, msg.key_slot)
                col = columns.setdefault(tup, len(columns))
                rows[s_idx][col] = rows[s_idx].get(col, 0.0) + p_path * key_p

    table = np.zeros((p_seq.size, len(columns)))
    for i, row in enumerate(rows):
        for col, p in row.items():
            table[i, col] = p
    return ExactMessageTable(p_seq, table, list(columns.keys()))


def _entropy_rows(p_rows: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(p_rows > 0.0, p_rows * np.log2(p_rows), 0.0)
    return -t.sum(axis=1)


def _entropy_flat(p: np.ndarray) -> float:
    p = p.ravel()
    p = p[p > 0.0]
    return float(-(p * np.log2(p)).sum()) if p.size else 0.0


def message_source_mutual_information(
    code: BinningCode, model: SourceModel
) -> tuple[float, np.ndarray]:
    """Exact I(Xt^n; message) in bits, plus the message marginal."""
    t = exact_message_table(code, model)
    p_w = t.p_sequence @ t.p_message_given_sequence
    h_w = _entropy_flat(p_w)
    h_w_given_xt = float(t.p_sequence @ _entropy_rows(t.p_message_given_sequence))
    return h_w - h_w_given_xt, p_w


def padded_indices_mutual_information(
    code: BinningCode, model: SourceModel
) -> tuple[float, np.ndarray]:
    """Exact I(Xt^n; padded message components) plus their joint marginal.

    The padded components are the key slot (key-slot regime), W_u (pad-u
    regime) or (W_v, W_u) (fully padded regime).  One-time padding with a
    uniform key makes them uniform and independent of the source block for
    every bin realization, so the returned mutual information is zero to
    machine precision and the marginal is exactly flat.
    """
    t = exact_message_table(code, model)
    if code.mode == "key_slot":
        pick = lambda m: (m[4],)
        size = 1 << code.bits.k_u
    elif code.mode == "pad_u":
        pick = lambda m: (m[3],)
        size = 1 << code.bits.w_u
    else:
        pick = lambda m: (m[1], m[3])
        size = 1 << (code.bits.w_v + code.bits.w_u)

    groups: dict[tuple, int] = {}
    cols = np.empty(len(t.messages), dtype=int)
    for j, m in enumerate(t.messages):
        cols[j] = groups.setdefault(pick(m), len(groups))
    table = np.zeros((t.p_sequence.size, size))
    assert len(groups) <= size
    for j, g in enumerate(cols):
        table[:, g] += t.p_message_given_sequence[:, j]
    p_pad = t.p_sequence @ table
    mi = _entropy_flat(p_pad) - float(t.p_sequence @ _entropy_rows(table))
    return mi, p_pad


@dataclass(frozen=True)
class ExactLeakage:
    """Exact per-symbol conditional leakages of a concrete small-n code."""

    secrecy: float   # I(Xt^n; message | Z^n) / n
    privacy: float   # I(X^n; message | Z^n) / n


def exact_leakage(code: BinningCode, model: SourceModel) -> ExactLeakage:
    """Exact finite-n leakage of the full transmitted+public message tuple.

    Computes I(Xt^n; W | Z^n)/n and I(X^n; W | Z^n)/n by enumeration, using
    W - Xt^n - Z^n and W - X^n - Z^n (the message is a function of the
    source block and private randomness).  The public indices F are part of
    W here, matching what the eavesdropper observes.
    """
    t = exact_message_table(code, model)
    n = code.n
    q = model.xtilde_size

    p_xt_z = np.einsum("x,xa,xz->az", model.px.probs, model.meas_enc.rows,
                       model.p_z_given_x().rows)

    cells = max(
        (q**n) * (model.z_size**n), (model.x_size**n) * (q**n)
    )
    if cells > 64_000_000:
        raise BinningScaleError("exact leakage joint tables exceed the budget")

    joint_xt_z = reduce(np.kron, [p_xt_z] * n)                   # (q^n, qz^n)
    p_zw = joint_xt_z.T @ t.p_message_given_sequence             # (qz^n, C)
    h_w_given_z = _entropy_flat(p_zw) - _entropy_flat(joint_xt_z.sum(axis=0))

    h_w_given_xt = float(t.p_sequence @ _entropy_rows(t.p_message_given_sequence))
    secrecy = (h_w_given_z - h_w_given_xt) / n

    enc_n = reduce(np.kron, [model.meas_enc.rows] * n)           # (qx^n, qxt^n)
    p_x_seq = reduce(np.kron, [model.px.probs] * n)
    p_w_given_x = enc_n @ t.p_message_given_sequence
    h_w_given_x = float(p_x_seq @ _entropy_rows(p_w_given_x))
    privacy = (h_w_given_z - h_w_given_x) / n
    return ExactLeakage(secrecy=max(0.0, secrecy), privacy=max(0.0, privacy))
