"""Stage orchestration: synth -> extract -> features -> localize -> report.

Stages communicate through files under the configured output directory so
each CLI subcommand can also run standalone on a previous stage's outputs:

    containers/*.risc   one binary container per acquisition
    sweeps.csv          role,ris,ue,pointing_deg,overall_gain_db
    mpcs.csv            role,ris,ue,pointing_deg,rank,ota_m,aoa_deg,
                        gain_re,gain_im,power_db
    features.csv        one row per (ue, anchor) feature bundle
    results.csv         scenario,ue,x,y,error_m,iterations,converged,in_room
    report.csv/.txt     per-scenario statistics with significance flags
    fig*.csv            plot-ready analogues of the campaign figures

All outputs are deterministic functions of (config, seed).
"""
from __future__ import annotations

import csv
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .channel import ChannelTensor, run_sweep
from .config import CampaignConfig
from .container import read_container, write_container
from .evaluation import build_report, mark_significance, render_table
from .features import AnchorFeatures, FeatureSet, anchor_key, build_anchor_features, build_series
from .geometry import PathSpec, aoa_at_ue, bearing_from_anchor, ota_distance, wrap180
from .positioning import run_campaign
from .sage import MpcEstimate, overall_gain_db, sage_extract, subband_select


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return repr(float(value))  # plain-float repr even for numpy scalars
    return str(value)


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _roles(cfg: CampaignConfig):
    yield "bs_scan", None
    for i in range(len(cfg.scene.ris_list)):
        yield "ris_scan", i


def _tag(role: str, ris_index) -> str:
    return "bs" if role == "bs_scan" else f"ris{ris_index + 1}"


def container_dir(cfg: CampaignConfig) -> Path:
    return cfg.out_dir / "containers"


def stage_synth(cfg: CampaignConfig) -> list[Path]:
    """Run every sweep of the campaign and persist one container per angle."""
    out = container_dir(cfg)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for role, ris_index in _roles(cfg):
        for ue_index in range(len(cfg.scene.ue_truths)):
            tensors = run_sweep(cfg.scene, cfg.radio, cfg.grid, role, ue_index, cfg.seed, ris_index)
            for angle_idx, tensor in enumerate(tensors):
                path = out / f"{_tag(role, ris_index)}_ue{ue_index + 1}_a{angle_idx:02d}.risc"
                write_container(path, tensor)
                written.append(path)
    return written


def _acquisitions(cfg: CampaignConfig):
    """Containers of the campaign in deterministic order."""
    out = container_dir(cfg)
    n_angles = cfg.scene.sweep.n_angles
    for role, ris_index in _roles(cfg):
        for ue_index in range(len(cfg.scene.ue_truths)):
            for angle_idx in range(n_angles):
                path = out / f"{_tag(role, ris_index)}_ue{ue_index + 1}_a{angle_idx:02d}.risc"
                if not path.exists():
                    raise FileNotFoundError(f"missing container {path}; run synth first")
                yield path


def _extract_task(args) -> tuple[float, list[tuple]]:
    tensor, sage_cfg = args
    work = subband_select(tensor, sage_cfg.subband) if sage_cfg.subband else tensor
    gain_db = overall_gain_db(work)
    mpcs = sage_extract(tensor, sage_cfg)
    rows = [(m.ota_distance, m.aoa_deg, m.gain.real, m.gain.imag, m.power_db) for m in mpcs]
    return gain_db, rows


def stage_extract(cfg: CampaignConfig) -> tuple[Path, Path]:
    """SAGE extraction plus overall gain for every stored acquisition."""
    tensors: list[ChannelTensor] = [
        read_container(path, cfg.grid.carrier) for path in _acquisitions(cfg)
    ]
    tasks = [(t, cfg.sage) for t in tensors]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            outputs = list(pool.map(_extract_task, tasks, chunksize=4))
    else:
        outputs = [_extract_task(t) for t in tasks]
    sweep_rows = []
    mpc_rows = []
    for tensor, (gain_db, rows) in zip(tensors, outputs):
        meta = tensor.meta
        ris = "" if meta.ris_index is None else meta.ris_index + 1
        sweep_rows.append([meta.role, ris, meta.ue_index + 1, meta.pointing_deg, gain_db])
        for rank, row in enumerate(rows):
            mpc_rows.append([meta.role, ris, meta.ue_index + 1, meta.pointing_deg, rank] + list(row))
    sweeps_path = cfg.out_dir / "sweeps.csv"
    mpcs_path = cfg.out_dir / "mpcs.csv"
    _write_csv(sweeps_path, ["role", "ris", "ue", "pointing_deg", "overall_gain_db"], sweep_rows)
    _write_csv(
        mpcs_path,
        ["role", "ris", "ue", "pointing_deg", "rank", "ota_m", "aoa_deg", "gain_re", "gain_im", "power_db"],
        mpc_rows,
    )
    return sweeps_path, mpcs_path


def _read_rows(path: Path) -> list[dict]:
    if not path.exists():
        raise FileNotFoundError(f"missing {path}; run the previous stage first")
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


FEATURE_COLUMNS = [
    "ue", "anchor", "gt_aod_deg", "gt_ota_m",
    "coarse_top1", "coarse_c1", "coarse_c2", "coarse_c3", "coarse_best",
    "fine_top1", "fine_c1", "fine_c2", "fine_c3", "fine_best",
    "path_distance_m", "aoa_deg",
]


def stage_features(cfg: CampaignConfig) -> Path:
    """Turn sweep series into per-(UE, anchor) radiolocation features."""
    sweeps = _read_rows(cfg.out_dir / "sweeps.csv")
    mpcs = _read_rows(cfg.out_dir / "mpcs.csv")
    gains: dict[tuple, dict[float, float]] = {}
    comps: dict[tuple, dict[float, list[MpcEstimate]]] = {}
    for row in sweeps:
        key = (row["role"], row["ris"], int(row["ue"]) - 1)
        gains.setdefault(key, {})[float(row["pointing_deg"])] = float(row["overall_gain_db"])
    for row in mpcs:
        key = (row["role"], row["ris"], int(row["ue"]) - 1)
        est = MpcEstimate(
            ota_distance=float(row["ota_m"]),
            aoa_deg=float(row["aoa_deg"]),
            gain=complex(float(row["gain_re"]), float(row["gain_im"])),
        )
        comps.setdefault(key, {}).setdefault(float(row["pointing_deg"]), []).append(est)
    feature_rows = []
    for ue_index in range(len(cfg.scene.ue_truths)):
        for role, ris_index in _roles(cfg):
            ris = "" if ris_index is None else ris_index + 1
            key = (role, str(ris), ue_index)
            if key not in gains:
                raise ValueError(f"sweeps.csv has no data for {key}")
            angles = sorted(gains[key])
            overall = [gains[key][a] for a in angles]
            per_angle = [comps.get(key, {}).get(a, []) for a in angles]
            series = build_series(cfg.scene, ue_index, ris_index, angles, overall, per_angle)
            feats = build_anchor_features(cfg.scene, ue_index, ris_index, series)
            c = feats.coarse_candidates
            f = feats.fine_candidates or [None, None, None]
            feature_rows.append([
                ue_index + 1, feats.anchor, feats.gt_aod_deg, feats.gt_ota_m,
                feats.coarse_top1, c[0], c[1], c[2], feats.coarse_best,
                feats.fine_top1, f[0], f[1], f[2], feats.fine_best,
                feats.path_distance_m, feats.aoa_deg,
            ])
    path = cfg.out_dir / "features.csv"
    _write_csv(path, FEATURE_COLUMNS, feature_rows)
    return path


def _opt_float(text: str):
    return None if text == "" else float(text)


def load_feature_sets(cfg: CampaignConfig) -> dict[int, FeatureSet]:
    rows = _read_rows(cfg.out_dir / "features.csv")
    sets: dict[int, FeatureSet] = {}
    for row in rows:
        ue_index = int(row["ue"]) - 1
        fs = sets.setdefault(ue_index, FeatureSet(ue_index))
        anchor = row["anchor"]
        ris_index = None if anchor == "bs" else int(anchor[3:]) - 1
        feats = AnchorFeatures(
            anchor=anchor,
            ris_index=ris_index,
            gt_aod_deg=float(row["gt_aod_deg"]),
            gt_ota_m=float(row["gt_ota_m"]),
            coarse_candidates=[v for v in (_opt_float(row[f"coarse_c{i}"]) for i in (1, 2, 3)) if v is not None],
            fine_candidates=[v for v in (_opt_float(row[f"fine_c{i}"]) for i in (1, 2, 3)) if v is not None],
            coarse_top1=_opt_float(row["coarse_top1"]),
            fine_top1=_opt_float(row["fine_top1"]),
            coarse_best=_opt_float(row["coarse_best"]),
            fine_best=_opt_float(row["fine_best"]),
            path_distance_m=_opt_float(row["path_distance_m"]),
            aoa_deg=_opt_float(row["aoa_deg"]),
        )
        fs.anchors[anchor] = feats
    return sets


def stage_localize(cfg: CampaignConfig) -> Path:
    features = load_feature_sets(cfg)
    results = run_campaign(
        cfg.scene,
        features,
        cfg.scenarios,
        cfg.seed,
        genie=cfg.genie_candidates,
        weight_angle=cfg.weight_angle,
        weight_distance=cfg.weight_distance,
        multistart=cfg.multistart,
    )
    rows = [
        [r.scenario, r.ue_index + 1, r.estimate.x, r.estimate.y, r.error_m, r.iterations, r.converged, r.in_room]
        for r in results
    ]
    path = cfg.out_dir / "results.csv"
    _write_csv(path, ["scenario", "ue", "x", "y", "error_m", "iterations", "converged", "in_room"], rows)
    return path


def stage_report(cfg: CampaignConfig) -> tuple[Path, Path]:
    rows = _read_rows(cfg.out_dir / "results.csv")
    errors: dict[str, list[float]] = {s: [] for s in cfg.scenarios}
    for row in rows:
        if row["scenario"] in errors:
            errors[row["scenario"]].append(float(row["error_m"]))
    errors = {s: v for s, v in errors.items() if v}
    report = build_report(errors)
    if len(report.rows) >= 2:
        mark_significance(report)
    n_ue = max(len(r.errors) for r in report.rows)
    header = ["scenario"] + [f"err_ue{i + 1}" for i in range(n_ue)] + ["rmse", "median", "significantly_worse", "p_value"]
    csv_rows = []
    for row in report.rows:
        cells = [row.scenario] + list(row.errors) + [None] * (n_ue - len(row.errors))
        cells += [row.rmse, row.median, row.significantly_worse, row.p_value]
        csv_rows.append(cells)
    report_csv = cfg.out_dir / "report.csv"
    report_txt = cfg.out_dir / "report.txt"
    _write_csv(report_csv, header, csv_rows)
    report_txt.parent.mkdir(parents=True, exist_ok=True)
    report_txt.write_text(render_table(report))
    return report_csv, report_txt


def stage_figdata(cfg: CampaignConfig) -> list[Path]:
    """Plot-ready CSVs mirroring the campaign's analysis figures."""
    out = []
    scene = cfg.scene
    mpc_rows = _read_rows(cfg.out_dir / "mpcs.csv")
    # MPC scatter for the showcase acquisition: first RIS scanning, first UE,
    # pointing angle closest to the geometric departure angle.
    scatter_rows = []
    if scene.ris_list:
        ue = scene.ue_truths[0]
        gt = bearing_from_anchor(scene.ris(0), ue)
        pointing = scene.sweep.nearest(gt)
        for kind, spec in (("dp_window", PathSpec("dp")), ("rp_window", PathSpec("rp", 0))):
            scatter_rows.append([kind, aoa_at_ue(scene, spec, ue), ota_distance(scene, spec, ue), None])
        for row in mpc_rows:
            if row["role"] == "ris_scan" and row["ris"] == "1" and row["ue"] == "1" \
                    and float(row["pointing_deg"]) == pointing:
                scatter_rows.append(["mpc", float(row["aoa_deg"]), float(row["ota_m"]), float(row["power_db"])])
    fig4 = cfg.out_dir / "fig4_mpc_scatter.csv"
    _write_csv(fig4, ["label", "aoa_deg", "ota_m", "power_db"], scatter_rows)
    out.append(fig4)

    feats = load_feature_sets(cfg)
    aod_rows = []
    dist_rows = []
    for ue_index in sorted(feats):
        ue = scene.ue_truths[ue_index]
        for i in range(len(scene.ris_list)):
            key = anchor_key(i)
            af = feats[ue_index].anchors.get(key)
            if af is None:
                continue
            ris_ue = scene.ris(i).position.distance_to(ue)

            def errs(cands):
                vals = [abs(wrap180(c - af.gt_aod_deg)) for c in cands]
                return vals + [None] * (3 - len(vals))

            if af.coarse_candidates:
                best = abs(wrap180(af.coarse_best - af.gt_aod_deg))
                aod_rows.append([key, ue_index + 1, ris_ue, "coarse"] + errs(af.coarse_candidates) + [best])
            if af.fine_candidates:
                best = abs(wrap180(af.fine_best - af.gt_aod_deg))
                aod_rows.append([key, ue_index + 1, ris_ue, "fine"] + errs(af.fine_candidates) + [best])
            if af.path_distance_m is not None:
                dist_rows.append([key, ue_index + 1, ris_ue, abs(af.path_distance_m - af.gt_ota_m)])
    fig5 = cfg.out_dir / "fig5_aod_errors.csv"
    _write_csv(fig5, ["anchor", "ue", "ris_ue_distance_m", "method", "err_c1", "err_c2", "err_c3", "err_best"], aod_rows)
    out.append(fig5)
    fig6 = cfg.out_dir / "fig6_distance_errors.csv"
    _write_csv(fig6, ["anchor", "ue", "ris_ue_distance_m", "distance_error_m"], dist_rows)
    out.append(fig6)

    result_rows = _read_rows(cfg.out_dir / "results.csv")
    pos_rows = []
    for row in result_rows:
        ue_index = int(row["ue"]) - 1
        truth = scene.ue_truths[ue_index]
        pos_rows.append([
            row["scenario"], ue_index + 1,
            float(row["x"]), float(row["y"]), truth.x, truth.y, float(row["error_m"]),
        ])
    fig7 = cfg.out_dir / "fig7_positions.csv"
    _write_csv(fig7, ["scenario", "ue", "x_est", "y_est", "x_true", "y_true", "error_m"], pos_rows)
    out.append(fig7)
    return out


def stage_pipeline(cfg: CampaignConfig) -> None:
    stage_synth(cfg)
    stage_extract(cfg)
    stage_features(cfg)
    stage_localize(cfg)
    stage_report(cfg)
    stage_figdata(cfg)
