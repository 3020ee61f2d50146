"""Command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 domain error (for
example a frequency outside the unit-cell table).
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import sys
from pathlib import Path

import numpy as np

from . import controller, fields, link, switch, synthesis
from .config import ConfigError, ScenarioConfig
from .core import direction_from_angle, electrical_size, wavelength
from .synthesis import PatternMask
from .unitcell import State

log = logging.getLogger("ristoolkit")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DOMAIN = 3


class DomainError(ValueError):
    pass


def _fmt_db(x: float) -> str:
    if np.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.6f}"


def _fmt_hz(x: float) -> str:
    return f"{x:.0f}"


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _emit(text: str, path: Path | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        path.write_text(text)


def _check_band(cfg: ScenarioConfig, resp, freqs_hz) -> None:
    for f in np.atleast_1d(freqs_hz):
        if not resp.contains(f):
            lo, hi = resp.band
            raise DomainError(f"{f / 1e9:g} GHz lies outside the unit-cell band "
                              f"{lo / 1e9:g}-{hi / 1e9:g} GHz")


def _read_pattern(path: Path, n_cols: int | None = None) -> PatternMask:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read pattern {path}: {exc}") from None
    try:
        mask = (PatternMask.from_json(text) if text.lstrip().startswith("{")
                else PatternMask.from_bitstring(text))
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"{path}: {exc}") from None
    if n_cols is not None and len(mask) != n_cols:
        raise ConfigError(f"{path}: pattern has {len(mask)} columns, array has {n_cols}")
    return mask


def _output_path(args_value, cfg: ScenarioConfig | None, key: str) -> Path | None:
    if args_value:
        return Path(args_value)
    return cfg.resolve(key) if cfg is not None else None


def _design(cfg: ScenarioConfig, resp, f_hz: float, far: bool = False) -> PatternMask:
    scene = cfg.scene(f_hz, far=far)
    return synthesis.synthesize(cfg.layout(), scene, resp, cfg["optimizer.method"], f_hz)


# --- subcommands -------------------------------------------------------------

def cmd_synthesize(args) -> int:
    cfg = ScenarioConfig.load(args.config)
    resp = cfg.response()
    f = cfg.design_frequency
    _check_band(cfg, resp, f.hz)
    layout = cfg.layout()
    scene = cfg.scene()
    mask = _design(cfg, resp, f.hz)
    e = fields.scattered_field(layout, mask, resp, scene).magnitude
    e_off = fields.scattered_field(layout, PatternMask.all_off(layout.n_cols), resp, scene).magnitude
    enh = fields.gain_enhancement(layout, mask, resp, scene)
    ex, ey = electrical_size(layout, f)
    summary = "".join([
        f"array: {layout.n_rows} x {layout.n_cols}, "
        f"{layout.size_x * 1e3:.2f} mm x {layout.size_y * 1e3:.2f} mm "
        f"({ex:.2f} x {ey:.2f} wavelengths)\n",
        f"frequency_ghz: {f.hz / 1e9:.6g}\n",
        f"optimizer: {cfg['optimizer.method']}\n",
        f"pattern: {mask.to_bitstring()}\n",
        f"field_abs: {e:.9e}\n",
        f"all_off_field_abs: {e_off:.9e}\n",
        f"enhancement_db: {_fmt_db(enh)}\n",
    ])
    pattern_path = _output_path(args.output, cfg, "output.pattern")
    if pattern_path is None:
        sys.stdout.write(mask.to_json() + "\n")
    else:
        pattern_path.write_text(mask.to_json() + "\n")
    summary_path = _output_path(args.summary, cfg, "output.summary")
    if summary_path is None:
        sys.stderr.write(summary)
    else:
        summary_path.write_text(summary)
    return EXIT_OK


def sweep_rows(cfg: ScenarioConfig, resp, mode: str | None = None,
               fixed: PatternMask | None = None) -> list[tuple[float, float, PatternMask]]:
    """(f_hz, enhancement_db, mask) per band point, in increasing frequency."""
    freqs = cfg.band()
    _check_band(cfg, resp, freqs)
    mode = mode or cfg["sweep.mode"]
    layout = cfg.layout()
    if mode == "fixed" and fixed is None:
        path = cfg.resolve("sweep.pattern")
        if path is not None:
            fixed = _read_pattern(path, layout.n_cols)
        else:
            _check_band(cfg, resp, cfg.design_frequency.hz)
            fixed = _design(cfg, resp, cfg.design_frequency.hz)
    rows = []
    for f in freqs:
        scene = cfg.scene(f)
        mask = fixed if mode == "fixed" else _design(cfg, resp, f)
        rows.append((float(f), fields.gain_enhancement(layout, mask, resp, scene), mask))
    return rows


def cmd_sweep(args) -> int:
    cfg = ScenarioConfig.load(args.config)
    resp = cfg.response()
    fixed = _read_pattern(Path(args.pattern), cfg.layout().n_cols) if args.pattern else None
    mode = args.mode or ("fixed" if fixed is not None else None)
    rows = sweep_rows(cfg, resp, mode, fixed)
    text = _csv_text(["freq_hz", "enhancement_db", "pattern"],
                     [(_fmt_hz(f), _fmt_db(e), m.to_bitstring()) for f, e, m in rows])
    _emit(text, _output_path(args.output, cfg, "output.csv"))
    return EXIT_OK


def cmd_cut(args) -> int:
    cfg = ScenarioConfig.load(args.config)
    resp = cfg.response()
    f = cfg.design_frequency
    _check_band(cfg, resp, f.hz)
    layout = cfg.layout()
    if args.pattern:
        mask = _read_pattern(Path(args.pattern), layout.n_cols)
    else:
        # the cut is a far-field pattern, so design for plane-wave terminals
        mask = _design(cfg, resp, f.hz, far=True)
    incidence = cfg.scene().feed
    cut = fields.pattern_cut(layout, mask, resp, incidence, f,
                             (cfg["cut.start_deg"], cfg["cut.stop_deg"]), cfg["cut.step_deg"],
                             element_q=cfg["scene.element_q"])
    text = _csv_text(["angle_deg", "power_db"],
                     [(f"{a:.6f}", _fmt_db(p)) for a, p in cut.rows()])
    _emit(text, _output_path(args.output, cfg, "output.csv"))
    sys.stderr.write(f"peak_angle_deg: {cut.peak_angle_deg:.6f}\n")
    return EXIT_OK


def link_rows(cfg: ScenarioConfig, resp, mask: PatternMask | None = None):
    """(f_hz, inc_deg, mask_id, pr_over_pt_db, enh_db) rows for the far-field link."""
    layout = cfg.layout()
    freqs = cfg.band()
    _check_band(cfg, resp, freqs)
    inc_deg = cfg["scene.tx.angle_deg"]
    inc = direction_from_angle(np.deg2rad(inc_deg))
    obs = direction_from_angle(np.deg2rad(cfg["scene.rx.angle_deg"]))
    d_lin = 10 ** (cfg["link.gain_dbi"] / 10)
    eff = cfg["link.efficiency"]
    q = cfg["scene.element_q"]
    rows = []
    for f in freqs:
        ff = link.far_field_distance(layout, f)
        r1 = cfg["link.r1_cm"] / 100 if not np.isnan(cfg["link.r1_cm"]) else ff
        r2 = cfg["link.r2_cm"] / 100 if not np.isnan(cfg["link.r2_cm"]) else ff
        m = mask if mask is not None else _design(cfg, resp, f, far=True)
        entries = [("all_off", PatternMask.all_off(layout.n_cols)), (m.to_bitstring(), m)]
        p_ref = None
        for mask_id, mm in entries:
            sigma = fields.rcs(layout, mm, resp, inc, obs, f, q)
            p = link.radar_received_ratio(link.RadarLinkParams(
                wavelength(f), r1, r2, sigma, d_lin, d_lin, eff, eff))
            p_ref = p if p_ref is None else p_ref
            enh = (0.0 if p == p_ref else
                   float("inf") if p_ref == 0 else 10 * np.log10(p / p_ref))
            rows.append((float(f), inc_deg, mask_id, link.ratio_db(p), enh))
    return rows


def cmd_link(args) -> int:
    cfg = ScenarioConfig.load(args.config)
    resp = cfg.response()
    layout = cfg.layout()
    mask = None
    path = Path(args.pattern) if args.pattern else cfg.resolve("link.pattern")
    if path is not None:
        mask = _read_pattern(path, layout.n_cols)
    rows = link_rows(cfg, resp, mask)
    text = _csv_text(["f_hz", "inc_deg", "mask_id", "pr_over_pt_db", "enh_db"],
                     [(_fmt_hz(f), f"{i:g}", mid, _fmt_db(p), _fmt_db(e))
                      for f, i, mid, p, e in rows])
    _emit(text, _output_path(args.output, cfg, "output.csv"))
    ff = link.far_field_distance(layout, cfg.design_frequency)
    sys.stderr.write(f"far_field_distance_cm: {ff * 100:.2f}\n")
    return EXIT_OK


def cmd_encode(args) -> int:
    if args.bits:
        try:
            mask = PatternMask.from_bitstring(args.bits)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    elif args.pattern:
        mask = _read_pattern(Path(args.pattern))
    else:
        raise ConfigError("give a pattern file or --bits")
    frame = controller.frame_command(mask)
    if args.device:
        n = controller.send_frame(frame, args.device)
        sys.stderr.write(f"wrote {n} bytes to {args.device}\n")
    sys.stdout.write(frame.hex() + "\n")
    return EXIT_OK


TABLE_COLUMNS = ("sample", "state", "f_ghz", "loss_db")


def read_switch_table(path) -> dict[str, list[switch.Measurement]]:
    """Switch characterization CSV: sample,state,f_ghz,loss_db (loss as positive dB)."""
    out: dict[str, list[switch.Measurement]] = {}
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    with fh:
        reader = csv.DictReader(fh)
        if set(TABLE_COLUMNS) - set(reader.fieldnames or ()):
            raise ConfigError(f"{path}: expected columns {', '.join(TABLE_COLUMNS)}")
        for row in reader:
            try:
                state = State[row["state"].strip().upper()]
                m = switch.Measurement(float(row["f_ghz"]) * 1e9, state, -float(row["loss_db"]))
            except (KeyError, ValueError):
                raise ConfigError(f"{path}: bad row {row}") from None
            out.setdefault(row["sample"].strip(), []).append(m)
    return out


def default_switch_table() -> Path:
    return Path(__file__).with_name("data") / "switch_characterization.csv"


def cmd_switch_fit(args) -> int:
    table = read_switch_table(args.table or default_switch_table())
    if args.sample not in table:
        raise ConfigError(f"sample {args.sample!r} not in table; have: {', '.join(table)}")
    ms = table[args.sample]
    if not args.include_off:
        ms = [m for m in ms if m.state is State.ON]
    initial = switch.read_switch_params(args.initial) if args.initial else switch.SwitchParams()
    free = tuple(s.strip() for s in args.free.split(",") if s.strip())
    try:
        fit = switch.fit_switch_params(ms, initial, free)
    except ValueError as exc:
        raise DomainError(str(exc)) from None
    _emit(switch.format_switch_params(fit.params), Path(args.output) if args.output else None)
    for m, r in zip(ms, fit.residuals_db):
        sys.stderr.write(f"{m.state.name} {m.f_hz / 1e9:g} GHz target {m.s21_db:.3f} dB "
                         f"residual {r:+.4f} dB\n")
    sys.stderr.write(f"converged: {fit.converged}\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ristoolkit",
                                description="1-bit column-biased RIS design and simulation")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synthesize", help="design a column pattern")
    s.add_argument("config")
    s.add_argument("-o", "--output", help="pattern JSON path (default: stdout)")
    s.add_argument("--summary", help="summary text path (default: stderr)")
    s.set_defaults(func=cmd_synthesize)

    s = sub.add_parser("sweep", help="enhancement versus frequency")
    s.add_argument("config")
    s.add_argument("--mode", choices=("reoptimize", "fixed"))
    s.add_argument("--pattern", help="fixed pattern file (implies --mode fixed)")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("cut", help="far-field pattern cut in the incidence plane")
    s.add_argument("config")
    s.add_argument("--pattern")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_cut)

    s = sub.add_parser("link", help="radar-range-equation link budget")
    s.add_argument("config")
    s.add_argument("--pattern")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_link)

    s = sub.add_parser("encode", help="controller frame for a pattern")
    s.add_argument("pattern", nargs="?")
    s.add_argument("--bits", help="pattern as a 0/1 string")
    s.add_argument("--device", help="character device to write the frame to")
    s.set_defaults(func=cmd_encode)

    s = sub.add_parser("switch-fit", help="fit shunt-switch parameters to characterization data")
    s.add_argument("table", nargs="?", help="sample,state,f_ghz,loss_db CSV (default: bundled)")
    s.add_argument("--sample", default="4 Layer VO2")
    s.add_argument("--free", default="r_on,c_shunt,l_series")
    s.add_argument("--initial", help="key-value file with starting/fixed parameters")
    s.add_argument("--include-off", action="store_true",
                   help="also fit OFF-state insertion loss rows")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_switch_fit)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return EXIT_CONFIG
    except (DomainError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
