"""Deterministic simulation of the handset <-> edge-server wireless exchange.

The channel is a single half-duplex medium shared by the handset's data
frames and the server's ACK/response frames. Time is kept as an integer
count of ``1/TICKS_PER_MS`` ms ticks and reported in milliseconds.

TCP transfer rules
------------------
* The connection is established; slow start begins at ``tcp_initial_cwnd``.
* The application writes the request head before the image body, so the
  very first segment leaves in a frame of its own. After that, a data
  frame carries every packet queued when the handset gains the channel,
  up to ``max_aggregation`` packets.
* The TCP stack keeps at most ``tcp_queue_limit`` packets queued at the
  NIC (a small-queue limit), which bounds the size of TCP data frames.
* Every data frame is acknowledged by one ACK frame that becomes ready
  ``rtt_base_us`` after the frame ends. ACKs already pending when the
  server gains the channel share one frame. An ACK frame costs
  ``frame_overhead_us``.
* On each ACK the window grows by the number of packets acknowledged and
  the freed window is released to the NIC as one write.
* When the channel frees up, the earliest-ready frame goes first; on a
  tie the downlink ACK wins.
* The transfer ends when the last packet is acknowledged.

UDP bursts hand every packet to the socket at once. The NIC splits them
into ``udp_frames_per_burst`` frames sent in one channel access, so only
the first frame pays ``frame_overhead_us``.
"""

from __future__ import annotations

import csv
import io
import math
from collections import deque
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from . import _kv
from .errors import BurstOverflow, ConfigError, DomainViolation
from .measurements import MeasurementGrid, MeasurementRecord, ingest
from .models import QuadraticModel1D, QuadraticModel2D, clamp01, eval_1d, eval_2d

MTU_BYTES = 1500
TCP_HEADER_BYTES = 52
UDP_HEADER_BYTES = 28

TRANSPORTS = ("tcp", "udp-burst")

#: simulation clock resolution: 2**-20 ms (about 0.95 ns). Every duration is
#: rounded to a whole tick, so differences between event times are exact.
TICKS_PER_MS = 1 << 20


@dataclass(frozen=True)
class SimConfig:
    phy_rate_mbps: float = 400.0
    frame_overhead_us: float = 180.0
    max_aggregation: int = 128
    tcp_initial_cwnd: int = 10
    tcp_payload_bytes: int = 1448
    udp_payload_bytes: int = 1472
    rtt_base_us: float = 400.0
    tcp_queue_limit: int = 10
    wake_latency_ms: float = 5.0
    idle_sleep_timeout_ms: float = 20.0
    udp_frames_per_burst: int = 3
    response_bytes: int = 1400
    rng_seed: int = 0

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if f.name == "rng_seed":
                if value < 0:
                    raise ConfigError(f"rng_seed must be >= 0, got {value}")
                continue
            if not value > 0:
                raise ConfigError(f"{f.name} must be positive, got {value!r}")
        if self.tcp_payload_bytes > MTU_BYTES - TCP_HEADER_BYTES:
            raise ConfigError(f"tcp_payload_bytes must be <= {MTU_BYTES - TCP_HEADER_BYTES}")
        if self.udp_payload_bytes > MTU_BYTES - UDP_HEADER_BYTES:
            raise ConfigError(f"udp_payload_bytes must be <= {MTU_BYTES - UDP_HEADER_BYTES}")

    def airtime_us(self, wire_bytes: float) -> float:
        return wire_bytes * 8.0 / self.phy_rate_mbps

    # key-value file support

    def dumps(self, header: Sequence[str] = ()) -> str:
        return _kv.format_kv([(f.name, getattr(self, f.name)) for f in fields(self)], list(header))

    @classmethod
    def loads(cls, text: str, *, path: str | None = None) -> SimConfig:
        kv = _kv.parse_kv(text, path=path)
        types = {f.name: f.type for f in fields(cls)}
        kwargs = {}
        for key, (value, line) in kv.items():
            if key not in types:
                raise ConfigError(f"unknown key {key!r}", path=path, line=line)
            conv = int if types[key] in (int, "int") else float
            try:
                kwargs[key] = conv(value)
            except ValueError:
                raise ConfigError(f"{key}: cannot parse {value!r} as {conv.__name__}", path=path, line=line) from None
        try:
            return cls(**kwargs)
        except ConfigError as exc:
            raise ConfigError(str(exc), path=path) from None

    @classmethod
    def load(cls, path: str | Path) -> SimConfig:
        p = Path(path)
        try:
            text = p.read_text(encoding="utf-8")
        except FileNotFoundError:
            raise ConfigError("file not found", path=str(p)) from None
        return cls.loads(text, path=str(p))


@dataclass(frozen=True)
class TransmissionProfile:
    transport: str
    powersave: str
    name: str

    def __post_init__(self):
        if self.transport not in TRANSPORTS:
            raise ValueError(f"transport must be one of {TRANSPORTS}, got {self.transport!r}")
        if self.powersave not in ("enabled", "disabled"):
            raise ValueError(f"powersave must be 'enabled' or 'disabled', got {self.powersave!r}")

    @property
    def powersave_enabled(self) -> bool:
        return self.powersave == "enabled"


PROFILES = {
    "tcp-ps": TransmissionProfile("tcp", "enabled", "tcp-ps"),
    "tcp-nops": TransmissionProfile("tcp", "disabled", "tcp-nops"),
    "udp-ps": TransmissionProfile("udp-burst", "enabled", "udp-ps"),
    "udp-nops": TransmissionProfile("udp-burst", "disabled", "udp-nops"),
}
ALIASES = {"vanilla": "tcp-ps", "optimized": "udp-nops"}
VANILLA = PROFILES["tcp-ps"]
OPTIMIZED = PROFILES["udp-nops"]


def get_profile(name: str) -> TransmissionProfile:
    try:
        return PROFILES[ALIASES.get(name, name)]
    except KeyError:
        known = sorted([*PROFILES, *ALIASES])
        raise ValueError(f"unknown profile {name!r}; known: {', '.join(known)}") from None


@dataclass(frozen=True)
class NicState:
    """Handset NIC power state.

    An awake NIC that has been idle for at least the sleep timeout (with
    powersave enabled) goes to sleep; a sleeping NIC must be woken before
    it can transmit, which costs ``wake_latency_ms``.
    """

    mode: str = "awake"
    last_activity_ms: float = 0.0

    def __post_init__(self):
        if self.mode not in ("awake", "asleep"):
            raise ValueError(f"mode must be 'awake' or 'asleep', got {self.mode!r}")

    def after_idle(self, now_ms: float, powersave_enabled: bool, timeout_ms: float) -> NicState:
        if now_ms < self.last_activity_ms:
            raise ValueError("time went backwards")
        if self.mode == "awake" and powersave_enabled and now_ms - self.last_activity_ms >= timeout_ms:
            return replace(self, mode="asleep")
        return self

    def woken(self, now_ms: float) -> NicState:
        return NicState("awake", now_ms)

    def touched(self, now_ms: float) -> NicState:
        return NicState(self.mode, max(now_ms, self.last_activity_ms))


EVENT_KINDS = ("wake", "frame-tx", "ack-rx", "response-rx")


@dataclass(frozen=True)
class TraceEvent:
    timestamp_ms: float
    kind: str
    packet_count: int


@dataclass
class TransferTrace:
    start_ms: float
    events: list[TraceEvent] = field(default_factory=list)

    @property
    def end_ms(self) -> float:
        return self.events[-1].timestamp_ms if self.events else self.start_ms

    @property
    def total_ms(self) -> float:
        return self.end_ms - self.start_ms

    @property
    def wake_ms(self) -> float:
        wakes = [e for e in self.events if e.kind == "wake"]
        return wakes[-1].timestamp_ms - self.start_ms if wakes else 0.0

    @property
    def data_phase_ms(self) -> float:
        """Time from the end of any wake-up to the last event."""
        return self.total_ms - self.wake_ms

    @property
    def data_frames(self) -> int:
        return sum(1 for e in self.events if e.kind == "frame-tx")

    @property
    def ack_frames(self) -> int:
        return sum(1 for e in self.events if e.kind == "ack-rx")

    @property
    def data_packets(self) -> int:
        return sum(e.packet_count for e in self.events if e.kind == "frame-tx")

    def dumps_csv(self, header: Sequence[str] = ()) -> str:
        buf = io.StringIO()
        for line in header:
            buf.write(f"# {line}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["timestamp_ms", "kind", "packet_count"])
        for e in self.events:
            w.writerow([format(e.timestamp_ms, ".9g"), e.kind, e.packet_count])
        return buf.getvalue()


def _payload(transport: str, cfg: SimConfig) -> tuple[int, int]:
    if transport == "tcp":
        return cfg.tcp_payload_bytes, TCP_HEADER_BYTES
    if transport in ("udp-burst", "udp"):
        return cfg.udp_payload_bytes, UDP_HEADER_BYTES
    raise ValueError(f"unknown transport {transport!r}")


def packetize(image_bytes: int, transport: str, cfg: SimConfig | None = None) -> int:
    """Number of packets needed to carry ``image_bytes`` of payload."""
    cfg = cfg or SimConfig()
    if image_bytes <= 0:
        raise DomainViolation(f"image size must be positive, got {image_bytes}", field="image_bytes")
    payload, _ = _payload(transport, cfg)
    return -(-image_bytes // payload)


def _wire_sizes(image_bytes: int, transport: str, cfg: SimConfig) -> list[int]:
    count = packetize(image_bytes, transport, cfg)
    payload, header = _payload(transport, cfg)
    sizes = [payload + header] * count
    sizes[-1] = image_bytes - payload * (count - 1) + header
    return sizes


def _ticks_from_us(us: float) -> int:
    return round(us * TICKS_PER_MS / 1000.0)


def _ticks_from_ms(ms: float) -> int:
    return round(ms * TICKS_PER_MS)


class _Clock:
    """Builds a trace on the integer tick grid."""

    def __init__(self, start_ms: float):
        self.start = _ticks_from_ms(start_ms)
        self.trace = TransferTrace(self.start / TICKS_PER_MS)

    def emit(self, ticks: int, kind: str, count: int) -> None:
        self.trace.events.append(TraceEvent(ticks / TICKS_PER_MS, kind, count))

    def data_start(self, nic: NicState, cfg: SimConfig) -> int:
        """Tick at which data may flow, after a wake-up if the NIC sleeps."""
        if nic.mode == "asleep":
            t = self.start + _ticks_from_ms(cfg.wake_latency_ms)
            self.emit(t, "wake", 0)
            return t
        return self.start


def _tcp_events(image_bytes: int, cfg: SimConfig, clock: _Clock, t0: int) -> int:
    """Run the TCP transfer from tick ``t0``; returns the last data-frame tick."""
    sizes = _wire_sizes(image_bytes, "tcp", cfg)
    n_pkts = len(sizes)
    overhead = _ticks_from_us(cfg.frame_overhead_us)
    rtt = _ticks_from_us(cfg.rtt_base_us)
    frame_cap = min(cfg.max_aggregation, cfg.tcp_queue_limit)

    cwnd = cfg.tcp_initial_cwnd
    first = min(cwnd, n_pkts)
    # writes: [ready tick, first packet index, packet count]; head goes first
    writes: deque[list] = deque([[t0, 0, 1]])
    if first > 1:
        writes.append([t0, 1, first - 1])
    head_pending = True
    next_pkt, inflight, acked = first, first, 0
    acks: deque[list] = deque()  # [ready tick, packets acknowledged]
    t_free = t0
    last_data = t0

    while acked < n_pkts:
        c_ready = writes[0][0] if writes else math.inf
        a_ready = acks[0][0] if acks else math.inf
        c_start = max(t_free, c_ready)
        a_start = max(t_free, a_ready)
        if a_start < c_start or (a_start == c_start and a_ready <= c_ready):
            k = 0
            while acks and acks[0][0] <= a_start:
                k += acks.popleft()[1]
            end = a_start + overhead
            clock.emit(end, "ack-rx", k)
            t_free = end
            acked += k
            inflight -= k
            cwnd += k
            release = min(cwnd - inflight, n_pkts - next_pkt)
            if release > 0:
                writes.append([end, next_pkt, release])
                next_pkt += release
                inflight += release
        else:
            s = c_start
            taken = 0
            first_idx = writes[0][1]
            while writes and taken < frame_cap and writes[0][0] <= s:
                ready, idx, count = writes[0]
                k = min(count, frame_cap - taken)
                taken += k
                if k == count:
                    writes.popleft()
                else:
                    writes[0] = [ready, idx + k, count - k]
                if head_pending:
                    head_pending = False
                    break
            wire = sum(sizes[first_idx:first_idx + taken])
            end = s + overhead + _ticks_from_us(cfg.airtime_us(wire))
            clock.emit(end, "frame-tx", taken)
            acks.append([end + rtt, taken])
            t_free = last_data = end
    return last_data


def simulate_tcp_transfer(
    image_bytes: int,
    cfg: SimConfig | None = None,
    nic: NicState | None = None,
    start_ms: float = 0.0,
) -> TransferTrace:
    """Uplink transfer of one image over an established TCP connection.

    The trace ends with the ACK of the last packet.
    """
    cfg = cfg or SimConfig()
    nic = nic or NicState("awake", start_ms)
    clock = _Clock(start_ms)
    _tcp_events(image_bytes, cfg, clock, clock.data_start(nic, cfg))
    return clock.trace


def udp_frame_split(n_pkts: int, cfg: SimConfig) -> list[int]:
    frames = min(cfg.udp_frames_per_burst, n_pkts)
    if n_pkts > cfg.udp_frames_per_burst * cfg.max_aggregation:
        raise BurstOverflow(
            f"{n_pkts} packets exceed {cfg.udp_frames_per_burst} frames x {cfg.max_aggregation} packets"
        )
    base, extra = divmod(n_pkts, frames)
    return [base + (1 if i < extra else 0) for i in range(frames)]


def _udp_events(image_bytes: int, cfg: SimConfig, clock: _Clock, t0: int) -> int:
    sizes = _wire_sizes(image_bytes, "udp-burst", cfg)
    t = t0 + _ticks_from_us(cfg.frame_overhead_us)
    i = 0
    for count in udp_frame_split(len(sizes), cfg):
        t += _ticks_from_us(cfg.airtime_us(sum(sizes[i:i + count])))
        i += count
        clock.emit(t, "frame-tx", count)
    return t


def simulate_udp_burst(
    image_bytes: int,
    cfg: SimConfig | None = None,
    nic: NicState | None = None,
    start_ms: float = 0.0,
) -> TransferTrace:
    """Uplink transfer of one image as a back-to-back UDP burst."""
    cfg = cfg or SimConfig()
    nic = nic or NicState("awake", start_ms)
    clock = _Clock(start_ms)
    _udp_events(image_bytes, cfg, clock, clock.data_start(nic, cfg))
    return clock.trace


def exchange_trace(
    image_bytes: int,
    profile: TransmissionProfile,
    cfg: SimConfig | None = None,
    inter_image_gap_ms: float = 0.0,
) -> TransferTrace:
    """Idle gap, uplink image transfer and the server's single-frame response.

    The NIC was last active at time 0; the trace starts when the gap ends.
    The response becomes ready ``rtt_base_us`` after the last data frame
    and is sent once the uplink transfer (including its final ACK) has
    cleared the channel.
    """
    cfg = cfg or SimConfig()
    if inter_image_gap_ms < 0:
        raise DomainViolation(f"gap must be >= 0, got {inter_image_gap_ms}", field="inter_image_gap_ms")
    nic = NicState("awake", 0.0).after_idle(
        inter_image_gap_ms, profile.powersave_enabled, cfg.idle_sleep_timeout_ms
    )
    clock = _Clock(inter_image_gap_ms)
    t0 = clock.data_start(nic, cfg)
    if profile.transport == "tcp":
        last_data = _tcp_events(image_bytes, cfg, clock, t0)
    else:
        last_data = _udp_events(image_bytes, cfg, clock, t0)
    _, header = _payload(profile.transport, cfg)
    uplink_end = _ticks_from_ms(clock.trace.end_ms)
    start = max(last_data + _ticks_from_us(cfg.rtt_base_us), uplink_end)
    end = start + _ticks_from_us(cfg.frame_overhead_us) + _ticks_from_us(
        cfg.airtime_us(cfg.response_bytes + header)
    )
    clock.emit(end, "response-rx", 1)
    return clock.trace


def simulate_exchange(
    image_bytes: int,
    profile: TransmissionProfile,
    cfg: SimConfig | None = None,
    inter_image_gap_ms: float = 0.0,
) -> float:
    """Wireless time (ms) for one image: wake-up if any, upload, response."""
    return exchange_trace(image_bytes, profile, cfg, inter_image_gap_ms).total_ms


# -- synthetic measurement campaign ------------------------------------------

@dataclass(frozen=True)
class SizeCurve:
    """Compressed image size as a function of encoding rate.

    ``size(q) = min_bytes + (max_bytes - min_bytes) * ((q - q_lo) / (q_hi - q_lo))**2``,
    so it is non-decreasing on ``[q_lo, q_hi]``.
    """

    min_bytes: int = 66_000
    max_bytes: int = 240_000
    q_lo: int = 10
    q_hi: int = 100

    def __post_init__(self):
        if not 0 < self.min_bytes <= self.max_bytes:
            raise ConfigError("size curve needs 0 < min_bytes <= max_bytes")
        if self.q_lo >= self.q_hi:
            raise ConfigError("size curve needs q_lo < q_hi")

    def __call__(self, q: float) -> int:
        u = (min(max(q, self.q_lo), self.q_hi) - self.q_lo) / (self.q_hi - self.q_lo)
        return round(self.min_bytes + (self.max_bytes - self.min_bytes) * u * u)


@dataclass(frozen=True)
class GeneratorSpec:
    """Ground-truth surfaces for every component except the simulated t_tx."""

    t_enc: QuadraticModel1D
    t_dec: QuadraticModel2D
    t_dl: QuadraticModel1D
    precision: QuadraticModel2D
    size_curve: SizeCurve = SizeCurve()
    inter_image_gap_ms: float = 25.0
    noise_ms: float = 0.0
    precision_noise: float = 0.0

    def __post_init__(self):
        if self.t_enc.variable != "q" or self.t_dl.variable != "n":
            raise ConfigError("t_enc must be a function of q and t_dl a function of n")
        if self.noise_ms < 0 or self.precision_noise < 0 or self.inter_image_gap_ms < 0:
            raise ConfigError("noise levels and gap must be >= 0")

    def with_noise(self, noise_ms: float, precision_noise: float = 0.0) -> GeneratorSpec:
        return replace(self, noise_ms=noise_ms, precision_noise=precision_noise)


#: Default surfaces: encoding grows from about 5 ms at q=25 to 11 ms at
#: q=100, inference dominates and grows with n, precision rises with n and q.
DEFAULT_TRUTH = GeneratorSpec(
    t_enc=QuadraticModel1D(3.5, 0.055, 0.0002, variable="q"),
    t_dec=QuadraticModel2D(0.6, 0.002, 0.004, 1.0e-5, 2.0e-6, 0.0),
    t_dl=QuadraticModel1D(13.6, 0.012, 2.0e-5, variable="n"),
    precision=QuadraticModel2D(0.05, 1.2e-3, 1.6e-3, 1.0e-6, -1.0e-6, 0.0, unit="dimensionless"),
)


def generate_records(
    cfg: SimConfig,
    profile: TransmissionProfile,
    truth: GeneratorSpec = DEFAULT_TRUTH,
    n_values: Sequence[int] | None = None,
    q_values: Sequence[int] | None = None,
    samples_per_cell: int = 1,
) -> list[MeasurementRecord]:
    """Synthetic per-sample records: t_tx simulated, everything else drawn
    from ``truth`` plus Gaussian noise seeded by ``cfg.rng_seed``."""
    from .measurements import N_MAX, N_MIN, N_STEP, Q_MAX, Q_MIN

    n_values = list(range(N_MIN, N_MAX + 1, N_STEP)) if n_values is None else list(n_values)
    q_values = list(range(Q_MIN, Q_MAX + 1)) if q_values is None else list(q_values)
    if not n_values or not q_values:
        raise ConfigError("n_values and q_values must be non-empty")
    if samples_per_cell < 1:
        raise ConfigError(f"samples_per_cell must be >= 1, got {samples_per_cell}")

    rng = np.random.default_rng(cfg.rng_seed)
    tx = {q: simulate_exchange(truth.size_curve(q), profile, cfg, truth.inter_image_gap_ms)
          for q in sorted(set(q_values))}

    def noisy(value: float, sigma: float) -> float:
        return value + float(rng.normal(0.0, sigma)) if sigma > 0 else value

    out = []
    for n in n_values:
        for q in q_values:
            enc = eval_1d(truth.t_enc, q)
            dec = eval_2d(truth.t_dec, n, q)
            dl = eval_1d(truth.t_dl, n)
            prec = eval_2d(truth.precision, n, q)
            for _ in range(samples_per_cell):
                out.append(MeasurementRecord(
                    nn_size=n,
                    encoding_rate=q,
                    t_enc_ms=max(0.0, noisy(enc, truth.noise_ms)),
                    t_dec_ms=max(0.0, noisy(dec, truth.noise_ms)),
                    t_tx_ms=max(0.0, noisy(tx[q], truth.noise_ms)),
                    t_dl_ms=max(0.0, noisy(dl, truth.noise_ms)),
                    precision=clamp01(noisy(prec, truth.precision_noise)),
                    image_bytes=truth.size_curve(q),
                    profile_name=profile.name,
                ))
    return out


def generate_grid(
    cfg: SimConfig,
    profile: TransmissionProfile,
    truth: GeneratorSpec = DEFAULT_TRUTH,
    n_values: Sequence[int] | None = None,
    q_values: Sequence[int] | None = None,
    samples_per_cell: int = 1,
) -> MeasurementGrid:
    return ingest(generate_records(cfg, profile, truth, n_values, q_values, samples_per_cell))
