"""Dev-time calibration: fine-AoD degradation and scenario errors vs distance."""
import sys
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from risloc.config import build_config
from risloc.channel import run_sweep
from risloc.features import FeatureSet, build_anchor_features, build_series
from risloc.geometry import wrap180
from risloc.positioning import run_campaign
from risloc.sage import overall_gain_db, sage_extract, subband_select


def ris_features(args):
    overrides, seed, ris, ue = args
    cfg = build_config(overrides)
    sc = cfg.scene
    tensors = run_sweep(sc, cfg.radio, cfg.grid, "ris_scan", ue, seed, ris)
    angles = [t.meta.pointing_deg for t in tensors]
    overall = [overall_gain_db(subband_select(t, cfg.sage.subband)) for t in tensors]
    mpcs = [sage_extract(t, cfg.sage) for t in tensors]
    series = build_series(sc, ue, ris, angles, overall, mpcs)
    feats = build_anchor_features(sc, ue, ris, series)
    d = sc.ris(ris).position.distance_to(sc.ue_truths[ue])
    return seed, ris, ue, d, feats


def study(overrides, seeds, jobs=8):
    cfg = build_config(overrides)
    tasks = [(overrides, s, r, u) for s in seeds for r in range(2) for u in range(5)]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        results = list(pool.map(ris_features, tasks))
    buckets = {"<3": [], "3-5": [], ">5": []}
    per_pair = {}
    feats_by_seed_ue = {}
    for seed, ris, ue, d, feats in results:
        err = 180.0 if feats.fine_best is None else abs(wrap180(feats.fine_best - feats.gt_aod_deg))
        key = "<3" if d < 3 else ("3-5" if d <= 5 else ">5")
        buckets[key].append(err)
        per_pair.setdefault((ris, ue), []).append(err)
        feats_by_seed_ue.setdefault((seed, ue), FeatureSet(ue)).anchors[feats.anchor] = feats
    med = {k: round(float(np.median(v)), 2) for k, v in buckets.items()}
    # scenario 2d (RP1 angle + distance) per UE, aggregated over seeds
    errs_2d = {u: [] for u in range(5)}
    for seed in seeds:
        feats_by_ue = {u: feats_by_seed_ue[(seed, u)] for u in range(5)}
        for r in run_campaign(cfg.scene, feats_by_ue, ["2d"], seed):
            errs_2d[r.ue_index].append(r.error_m)
    med_2d = {u + 1: round(float(np.median(v)), 2) for u, v in errs_2d.items()}
    return med, per_pair, med_2d


if __name__ == "__main__":
    seeds = [101, 202, 303, 404, 505, 606, 707, 808]
    args = [float(x) for x in sys.argv[1:]]
    snrs = args or [6.0]
    for snr in snrs:
        overrides = {
            "band": {"f_start_hz": 27.0e9, "f_stop_hz": 29.0e9, "f_step_hz": 10.0e6, "carrier_hz": 28.0e9},
            "radio": {
                "snr_db": snr,
                "ris_illumination_gain_db": [30.0, 34.2],
                "clutter": {"count": 16, "level_db": 13.0},
            },
        }
        t0 = time.time()
        med, per_pair, med_2d = study(overrides, seeds)
        print(f"snr={snr}: bucket medians {med}   scenario-2d medians {med_2d}", flush=True)
        for (ris, ue), errs in sorted(per_pair.items()):
            big = sum(1 for e in errs if e > 3.0)
            print(f"   ris{ris+1}-ue{ue+1}: corrupt {big}/{len(errs)}  errs {[round(e,1) for e in sorted(errs)]}", flush=True)
        print(f"   ({round(time.time()-t0,1)}s)", flush=True)
