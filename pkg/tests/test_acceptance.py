"""Exit criteria for the link simulator, one test per criterion."""

import math

import numpy as np

from semlink.codec import compress, decompress, deserialize, serialize
from semlink.concealment import median_filter
from semlink.fixtures import load_shipped_fixtures, piecewise_constant_map
from semlink.harness import ScenarioConfig, fer_point, run_scenario, transmit_once
from semlink.metrics import INFINITE, compression_ratio, psnr
from semlink.modem import ChannelParams, hard_decision, modulate, transmit, uncoded_ber
from semlink.polar import construct
from semlink.semantics import LabelMap, validate

SEED = 20240


def test_ac01_fer_waterfall(criterion):
    code = construct(1024, 512, 2.5)
    sweep = [1.0, 1.5, 2.0, 2.5, 3.0]
    fers = [fer_point(code, e, 2000, SEED).fer for e in sweep]
    decreasing = all(a > b for a, b in zip(fers, fers[1:]))
    steep = fers[4] <= 0.2 * fers[1]
    criterion(
        "AC1 FER waterfall PC(1024,512)",
        decreasing and steep,
        f"FER {['%.4g' % f for f in fers]} at {sweep} dB, FER(3.0)/FER(1.5)={fers[4] / fers[1]:.3g}",
    )


def test_ac02_blocklength_gain(criterion):
    short = fer_point(construct(512, 256, 2.5), 3.0, 5000, SEED)
    long = fer_point(construct(2048, 1024, 2.5), 3.0, 5000, SEED)
    criterion(
        "AC2 blocklength gain at 3.0 dB",
        long.fer <= short.fer and long.fer_high < short.fer_low,
        f"N=512 FER={short.fer:.4g} [{short.fer_low:.4g}, {short.fer_high:.4g}], "
        f"N=2048 FER={long.fer:.4g} [{long.fer_low:.4g}, {long.fer_high:.4g}]",
    )


def test_ac03_uncoded_bpsk_oracle(criterion):
    rate = 0.5
    worst = 0.0
    for i, ebno in enumerate([1.0, 1.5, 2.0, 2.1, 2.2, 2.3, 2.4, 2.5, 2.6, 2.7, 2.8, 2.9, 3.0]):
        params = ChannelParams(ebno, rate, SEED)
        bits = np.random.default_rng([SEED, i]).integers(0, 2, 1_000_000, dtype=np.uint8)
        measured = float(np.mean(hard_decision(transmit(modulate(bits), params, i)) != bits))
        expected = uncoded_ber(ebno, rate)
        se = math.sqrt(expected * (1 - expected) / bits.size)
        worst = max(worst, abs(measured - expected) / se)
    criterion("AC3 raw BER vs Q(sqrt(2R Eb/N0))", worst <= 3.0, f"worst deviation {worst:.2f} SE over 13 points")


def test_ac04_operating_point(criterion):
    rec = fer_point(construct(4096, 2048, 2.5), 2.1, 500, SEED)
    criterion(
        "AC4 PC(4096,2048) post-decode BER at 2.1 dB",
        0.0004 <= rec.ber <= 0.04,
        f"BER={rec.ber:.4%} (FER={rec.fer:.3g}, raw BER={rec.raw_ber:.3%}) in [0.04%, 4%]",
    )


def test_ac05_lossless_quantization(criterion):
    rng = np.random.default_rng(SEED)
    maps = []
    for _ in range(100):
        h, w = rng.integers(1, 129, 2)
        if rng.random() < 0.5:
            maps.append(piecewise_constant_map(w, h, int(rng.integers(1, 11)), rng, min_side=1))
        else:
            maps.append(LabelMap(rng.integers(0, 256, (h, w), dtype=np.uint8)))
    maps += load_shipped_fixtures()
    exact = 0
    for m in maps:
        out, damaged = decompress(deserialize(serialize(compress(m))), m.width, m.height)
        exact += out == m and not damaged and psnr(m, out) == INFINITE
    # the same maps through the noiseless quantization scenario
    records = run_scenario(
        ScenarioConfig(scenario="quant", trials=1, conceal=False),
        maps=[(f"m{i}", m) for i, m in enumerate(maps)],
    )
    scenario_ok = sum(r.psnr_pre_conceal == INFINITE and r.acceptance_pre == 1.0 for r in records[100:])
    scenario_ok += sum(r.psnr_pre_conceal == INFINITE for r in records[:100])
    criterion(
        "AC5 lossless quantization scenario",
        exact == len(maps) and scenario_ok == len(maps),
        f"{exact}/{len(maps)} bit-exact codec round trips, {scenario_ok}/{len(maps)} infinite-PSNR scenario rows",
    )


def test_ac06_burst_confinement(criterion):
    fixtures = load_shipped_fixtures()
    cfg = ScenarioConfig(conceal=False, trials=1)
    rng = np.random.default_rng(SEED)
    confined = 0
    for t in range(100):
        m = fixtures[t % len(fixtures)]
        j = int(rng.integers(0, 256))
        out = transmit_once(m, cfg, INFINITE, image_index=t, trial=t, fail_frames=[j])
        diff = np.flatnonzero(out.received.pixels.ravel() != m.pixels.ravel())
        confined += bool(diff.size) and diff.min() >= 256 * j and diff.max() < 256 * (j + 1)
    criterion("AC6 burst confinement", confined == 100, f"{confined}/100 forced failures confined to one 256-pixel segment")


def test_ac07_concealment_efficacy(criterion):
    worst = 0.0
    monotone = 0
    for t in range(100):
        rng = np.random.default_rng([SEED, t])
        clean = piecewise_constant_map(256, 256, int(rng.integers(2, 11)), rng)
        noisy = clean.pixels.copy()
        hit = rng.random(noisy.shape) < 0.004
        noisy[hit] = rng.integers(0, 256, int(hit.sum()), dtype=np.uint8)
        noisy_map = LabelMap(noisy)
        filtered = median_filter(noisy_map)
        worst = max(worst, float(np.mean(filtered.pixels != clean.pixels)))
        monotone += validate(filtered).accepted >= validate(noisy_map).accepted
    criterion(
        "AC7 concealment at 0.4% pixel corruption",
        worst < 0.001 and monotone >= 95,
        f"worst residual {worst:.4%} (< 0.1%), acceptance-after >= before in {monotone}/100 trials",
    )


def test_ac08_edge_preservation(criterion):
    checked = fixed = 0
    for a, b in [(4, 170), (170, 4)]:
        for offset in range(1, 32):
            for transpose in (False, True):
                p = np.full((32, 32), a, dtype=np.uint8)
                p[:, offset:] = b
                if transpose:
                    p = p.T.copy()
                m = LabelMap(p)
                checked += 1
                fixed += median_filter(m) == m
    criterion("AC8 edge preservation", fixed == checked, f"{fixed}/{checked} straight boundaries are fixed points")


def test_ac09_compression_ratio(criterion):
    rng = np.random.default_rng(SEED)
    ratios = []
    for _ in range(100):
        m = piecewise_constant_map(256, 256, int(rng.integers(1, 11)), rng)
        ratios.append(compression_ratio(m.size, compress(m).nbytes()))
    shipped = [compression_ratio(m.size, compress(m).nbytes()) for m in load_shipped_fixtures()]
    criterion(
        "AC9 RLE compression ratio",
        min(ratios) >= 15 and min(shipped) >= 15,
        f"min ratio {min(ratios):.1f} over 100 synthetic maps, shipped fixtures {min(shipped):.1f}..{max(shipped):.1f}",
    )


def test_ac10_determinism(criterion, tmp_path):
    maps = [(f"f{i}", m) for i, m in enumerate(load_shipped_fixtures()[:3])]
    outputs = []
    for run, workers in enumerate((1, 1, 2)):
        root = tmp_path / f"run{run}"
        for scenario in ("channel", "joint"):
            cfg = ScenarioConfig(scenario=scenario, ebno_sweep=(2.0, 2.3), trials=2, seed=SEED, workers=workers)
            run_scenario(cfg, root / f"{scenario}.csv", dump_dir=root / scenario, maps=maps)
        outputs.append({p.relative_to(root).as_posix(): p.read_bytes() for p in root.rglob("*") if p.is_file()})
    same = outputs[0] == outputs[1] == outputs[2]
    criterion(
        "AC10 determinism",
        same and len(outputs[0]) == 2 + 2 * 3 * 2 * 2,
        f"{len(outputs[0])} CSV/PGM outputs byte-identical across 2 reruns and workers=1/2",
    )
