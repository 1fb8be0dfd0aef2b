"""End-to-end transmission scenarios and the FER benchmark.

Every random draw is keyed by ``(seed, work item)`` through
:func:`semlink.modem.noise_rng`, so reports do not depend on how many worker
processes share the work or in which order they finish.
"""

from __future__ import annotations

import csv
import io
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Iterable, Sequence, TextIO

import numpy as np

from . import codec
from .concealment import FilterConfig, median_filter
from .framing import pack_bytes, packetize, reassemble, unpack_bytes
from .metrics import INFINITE, format_value, mse, psnr_from_mse, wilson_interval
from .modem import ChannelParams, demap, hard_decision, modulate, noise_rng, transmit_frames
from .pgm import read_pgm, write_pgm
from .polar import PolarCodeSpec, cached_code, encode, sc_decode_batch
from .semantics import LabelMap, TrainedLabelSet, validate

__all__ = [
    "ScenarioConfig",
    "ScenarioRecord",
    "TrialOutcome",
    "FerRecord",
    "transmit_once",
    "transmit_image",
    "run_scenario",
    "run_fer_bench",
    "write_scenario_csv",
    "write_fer_csv",
    "DEFAULT_SWEEP",
]

log = logging.getLogger(__name__)

SCENARIOS = ("channel_noise", "quantization_only", "joint")
SCENARIO_ALIASES = {"channel": "channel_noise", "quant": "quantization_only", "joint": "joint"}
DEFAULT_SWEEP = tuple(round(2.0 + 0.1 * i, 1) for i in range(11))
SCENARIO_CSV_VERSION = "semlink scenario report v1"
FER_CSV_VERSION = "semlink fer bench v1"

# LLR magnitude fed to the decoder when the channel is bypassed
NOISELESS_LLR = 1.0e3

# stream-key tags separating independent random streams of one work item
_TAG_NOISE = 0
_TAG_MESSAGE = 1
_TAG_FAILURE = 2


def _ebno_key(ebno_db: float) -> int:
    if math.isinf(ebno_db):
        return 0
    return int(round(ebno_db * 1000)) + (1 << 20)


@dataclass(frozen=True)
class ScenarioConfig:
    """Configuration of one scenario run.

    ``quantization_only`` always compresses and bypasses the channel noise;
    ``joint`` always compresses.
    """

    scenario: str = "channel_noise"
    ebno_sweep: tuple = DEFAULT_SWEEP
    n: int = 4096
    k: int = 2048
    design_ebno_db: float = 2.5
    conceal: bool = True
    compress: bool = False
    window: int = 3
    seed: int = 0
    trials: int = 25
    input_paths: tuple = ()
    workers: int = 1

    def __post_init__(self):
        scenario = SCENARIO_ALIASES.get(self.scenario, self.scenario)
        if scenario not in SCENARIOS:
            raise ValueError(f"unknown scenario {self.scenario!r}")
        object.__setattr__(self, "scenario", scenario)
        sweep = tuple(float(e) for e in self.ebno_sweep)
        if scenario == "quantization_only":
            sweep = (INFINITE,)
        if not sweep:
            raise ValueError("Eb/N0 sweep must not be empty")
        object.__setattr__(self, "ebno_sweep", sweep)
        if scenario != "channel_noise":
            object.__setattr__(self, "compress", True)
        object.__setattr__(self, "input_paths", tuple(os.fspath(p) for p in self.input_paths))
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")
        if self.k % 8:
            raise ValueError(f"K must be a multiple of 8, got {self.k}")
        FilterConfig(self.window)
        self.code()

    def code(self) -> PolarCodeSpec:
        return cached_code(self.n, self.k, float(self.design_ebno_db))

    @property
    def filter(self) -> FilterConfig:
        return FilterConfig(self.window)


@dataclass
class TrialOutcome:
    """Result of sending one map once through the link."""

    received: LabelMap
    concealed: LabelMap
    raw_bit_errors: int
    raw_bits: int
    info_bit_errors: int
    info_bits: int
    frame_errors: int
    frames: int
    payload_bytes: int
    damaged: bool
    accepted_pre: bool
    accepted_post: bool
    mse_pre: float
    mse_post: float


@dataclass
class ScenarioRecord:
    image: str
    scenario: str
    ebno_db: float
    trials: int
    raw_ber: float
    post_decode_ber: float
    fer: float
    psnr_pre_conceal: float
    psnr_post_conceal: float
    acceptance_pre: float
    acceptance_post: float
    compressed_bytes: int
    compression_ratio: float
    damage_flag: float
    seed: int
    n: int
    k: int
    design_ebno_db: float
    conceal: bool
    window: int


def _payload(label_map: LabelMap, cfg: ScenarioConfig) -> bytes:
    if cfg.compress:
        return codec.serialize(codec.compress(label_map))
    return label_map.tobytes()


def transmit_once(
    label_map: LabelMap,
    cfg: ScenarioConfig,
    ebno_db: float,
    image_index: int = 0,
    trial: int = 0,
    *,
    fail_frames: Iterable[int] = (),
    trained: TrainedLabelSet | None = None,
) -> TrialOutcome:
    """Send ``label_map`` through the whole link once.

    ``fail_frames`` forces the listed decoded frames to be replaced by random
    bits, emulating decoder failures independent of the channel noise.
    """
    code = cfg.code()
    payload = _payload(label_map, cfg)
    if cfg.compress:
        messages = pack_bytes(payload, code.message_length)
    else:
        plan, messages = packetize(label_map, code.message_length)
    codewords = encode(code, messages)
    symbols = modulate(codewords)
    frames = messages.shape[0]
    base = (image_index, _ebno_key(ebno_db), trial)

    if math.isinf(ebno_db) and ebno_db > 0:
        llrs = symbols * NOISELESS_LLR
        raw_errors = 0
    else:
        params = ChannelParams(ebno_db, code.rate, cfg.seed)
        received = transmit_frames(
            symbols, params, [(*base, f, _TAG_NOISE) for f in range(frames)]
        )
        llrs = demap(received, params)
        raw_errors = int(np.count_nonzero(hard_decision(received) != codewords))

    decoded = sc_decode_batch(code, llrs)
    for f in sorted(set(int(j) for j in fail_frames)):
        if not 0 <= f < frames:
            raise ValueError(f"frame index {f} out of range 0..{frames - 1}")
        rng = noise_rng(cfg.seed, (*base, f, _TAG_FAILURE))
        decoded[f] = rng.integers(0, 2, code.message_length, dtype=np.uint8)

    bit_errors = decoded != messages
    if cfg.compress:
        stream = codec.deserialize(unpack_bytes(decoded, len(payload)))
        received_map, damaged = codec.decompress(stream, label_map.width, label_map.height)
    else:
        received_map, damaged = reassemble(plan, decoded), False

    concealed = median_filter(received_map, cfg.filter) if cfg.conceal else received_map
    trained = trained or TrainedLabelSet.coco_stuff()
    return TrialOutcome(
        received=received_map,
        concealed=concealed,
        raw_bit_errors=raw_errors,
        raw_bits=codewords.size,
        info_bit_errors=int(np.count_nonzero(bit_errors)),
        info_bits=messages.size,
        frame_errors=int(np.count_nonzero(bit_errors.any(axis=1))),
        frames=frames,
        payload_bytes=len(payload),
        damaged=damaged,
        accepted_pre=validate(received_map, trained).accepted,
        accepted_post=validate(concealed, trained).accepted,
        mse_pre=mse(label_map, received_map),
        mse_post=mse(label_map, concealed),
    )


def _aggregate(name: str, cfg: ScenarioConfig, ebno_db: float, outcomes: Sequence[TrialOutcome], original_bytes: int) -> ScenarioRecord:
    n = len(outcomes)
    payload = outcomes[0].payload_bytes
    return ScenarioRecord(
        image=name,
        scenario=cfg.scenario,
        ebno_db=ebno_db,
        trials=n,
        raw_ber=sum(o.raw_bit_errors for o in outcomes) / sum(o.raw_bits for o in outcomes),
        post_decode_ber=sum(o.info_bit_errors for o in outcomes) / sum(o.info_bits for o in outcomes),
        fer=sum(o.frame_errors for o in outcomes) / sum(o.frames for o in outcomes),
        # pooled over trials so a single clean trial cannot dominate as infinity
        psnr_pre_conceal=psnr_from_mse(sum(o.mse_pre for o in outcomes) / n),
        psnr_post_conceal=psnr_from_mse(sum(o.mse_post for o in outcomes) / n),
        acceptance_pre=sum(o.accepted_pre for o in outcomes) / n,
        acceptance_post=sum(o.accepted_post for o in outcomes) / n,
        compressed_bytes=payload,
        compression_ratio=original_bytes / payload,
        damage_flag=sum(o.damaged for o in outcomes) / n,
        seed=cfg.seed,
        n=cfg.n,
        k=cfg.k,
        design_ebno_db=cfg.design_ebno_db,
        conceal=cfg.conceal,
        window=cfg.window,
    )


def transmit_image(
    label_map: LabelMap,
    cfg: ScenarioConfig,
    ebno_db: float,
    image_index: int = 0,
    name: str = "",
) -> ScenarioRecord:
    """Send a map ``cfg.trials`` times at one Eb/N0 and aggregate the metrics."""
    record, _ = _run_point(label_map, cfg, ebno_db, image_index, name)
    return record


def _run_point(label_map, cfg, ebno_db, image_index, name):
    outcomes = [
        transmit_once(label_map, cfg, ebno_db, image_index, t) for t in range(cfg.trials)
    ]
    record = _aggregate(name or f"image{image_index}", cfg, ebno_db, outcomes, label_map.size)
    return record, (outcomes[0].received, outcomes[0].concealed)


def _work_item(args):
    pixels, cfg, ebno_db, image_index, name = args
    record, maps = _run_point(LabelMap(pixels), cfg, ebno_db, image_index, name)
    return record, tuple(m.pixels for m in maps)


def run_scenario(
    cfg: ScenarioConfig,
    out: str | os.PathLike | TextIO | None = None,
    dump_dir: str | os.PathLike | None = None,
    maps: Sequence[tuple[str, LabelMap]] | None = None,
) -> list[ScenarioRecord]:
    """Run every (image, Eb/N0) point of a scenario.

    Inputs come from ``cfg.input_paths`` unless ``maps`` supplies named maps
    directly. All inputs are read before any channel simulation starts. The
    CSV, if requested, has one row per point ordered by image then Eb/N0, and
    ``dump_dir`` receives the received and concealed maps of trial 0.
    """
    if maps is None:
        if not cfg.input_paths:
            raise ValueError("no input images")
        maps = [(Path(p).stem, read_pgm(p)) for p in cfg.input_paths]
    if not maps:
        raise ValueError("no input images")
    if dump_dir is not None:
        dump_dir = Path(dump_dir)
        dump_dir.mkdir(parents=True, exist_ok=True)

    items = [
        (m.pixels, cfg, ebno, i, name)
        for i, (name, m) in enumerate(maps)
        for ebno in cfg.ebno_sweep
    ]
    if cfg.workers > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_work_item, items))
    else:
        results = [_work_item(item) for item in items]

    records = []
    for record, (received, concealed) in results:
        records.append(record)
        log.info("%s @ %s dB: fer=%.4g accept=%.2f/%.2f", record.image, record.ebno_db,
                 record.fer, record.acceptance_pre, record.acceptance_post)
        if dump_dir is not None:
            stem = f"{record.image}_ebno{format_value(record.ebno_db)}"
            write_pgm(LabelMap(received), dump_dir / f"{stem}_received.pgm")
            write_pgm(LabelMap(concealed), dump_dir / f"{stem}_concealed.pgm")
    if out is not None:
        write_scenario_csv(records, out)
    return records


def _write_csv(header_comment: str, rows: Sequence, out) -> None:
    if isinstance(out, (str, os.PathLike)):
        with open(out, "w", newline="") as fh:
            _write_csv(header_comment, rows, fh)
        return
    out.write(f"# {header_comment}\n")
    names = [f.name for f in fields(rows[0])] if rows else []
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(names)
    for row in rows:
        writer.writerow(
            [v if isinstance(v, str) else format_value(v) for v in (getattr(row, n) for n in names)]
        )


def write_scenario_csv(records: Sequence[ScenarioRecord], out) -> None:
    _write_csv(SCENARIO_CSV_VERSION, records, out)


def scenario_csv_text(records: Sequence[ScenarioRecord]) -> str:
    buf = io.StringIO()
    write_scenario_csv(records, buf)
    return buf.getvalue()


@dataclass
class FerRecord:
    n: int
    k: int
    ebno_db: float
    frames: int
    frame_errors: int
    fer: float
    fer_low: float
    fer_high: float
    bit_errors: int
    ber: float
    raw_ber: float
    design_ebno_db: float
    seed: int


def fer_point(
    code: PolarCodeSpec,
    ebno_db: float,
    frames: int,
    seed: int,
    batch: int = 1000,
) -> FerRecord:
    """Monte Carlo FER/BER of one code at one Eb/N0 with random messages."""
    if frames < 1:
        raise ValueError("need at least one frame per point")
    params = ChannelParams(ebno_db, code.rate, seed)
    base = (code.block_length, code.message_length, _ebno_key(ebno_db))
    frame_errors = bit_errors = raw_errors = 0
    for start in range(0, frames, batch):
        idx = range(start, min(start + batch, frames))
        messages = np.stack(
            [noise_rng(seed, (*base, f, _TAG_MESSAGE)).integers(0, 2, code.message_length, dtype=np.uint8) for f in idx]
        )
        codewords = encode(code, messages)
        received = transmit_frames(modulate(codewords), params, [(*base, f, _TAG_NOISE) for f in idx])
        decoded = sc_decode_batch(code, demap(received, params))
        wrong = decoded != messages
        frame_errors += int(np.count_nonzero(wrong.any(axis=1)))
        bit_errors += int(np.count_nonzero(wrong))
        raw_errors += int(np.count_nonzero(hard_decision(received) != codewords))
    low, high = wilson_interval(frame_errors, frames)
    return FerRecord(
        n=code.block_length,
        k=code.message_length,
        ebno_db=ebno_db,
        frames=frames,
        frame_errors=frame_errors,
        fer=frame_errors / frames,
        fer_low=low,
        fer_high=high,
        bit_errors=bit_errors,
        ber=bit_errors / (frames * code.message_length),
        raw_ber=raw_errors / (frames * code.block_length),
        design_ebno_db=code.design_ebno_db,
        seed=seed,
    )


def run_fer_bench(
    n_list: Sequence[int],
    rate: float,
    ebno_sweep: Sequence[float],
    trials: int,
    seed: int = 0,
    design_ebno_db: float = 2.5,
    out: str | os.PathLike | TextIO | None = None,
) -> list[FerRecord]:
    """FER/BER per (N, Eb/N0) for rate-``rate`` codes, ``trials`` frames each."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if not 0 < rate <= 1:
        raise ValueError(f"rate must lie in (0, 1], got {rate}")
    if not ebno_sweep:
        raise ValueError("Eb/N0 sweep must not be empty")
    records = []
    for n in n_list:
        k = int(round(rate * n))
        code = cached_code(n, k, float(design_ebno_db))
        for ebno in ebno_sweep:
            rec = fer_point(code, float(ebno), trials, seed)
            log.info("PC(%d,%d) @ %.2f dB: fer=%.4g", n, k, ebno, rec.fer)
            records.append(rec)
    if out is not None:
        write_fer_csv(records, out)
    return records


def write_fer_csv(records: Sequence[FerRecord], out) -> None:
    _write_csv(FER_CSV_VERSION, records, out)
