"""Command-line front end: scenario runs, sweeps and quick single-point modes."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from . import fock as fk
from .atmosphere import (
    BeamWanderParams,
    DownlinkParams,
    FadingDistribution,
    downlink_transmissivity,
    sample_transmission,
)
from .config import ScenarioConfig, load_config
from .errors import (
    DomainError,
    HeraldImpossibleError,
    PhysicalityError,
    PreconditionError,
    SatCVError,
    TruncationError,
    UnsupportedConfigurationError,
    ValidationError,
)
from .gaussian import CovarianceState, log_negativity_gaussian, two_mode_transfer_cov
from .qkd import (
    ChannelPoint,
    NonGaussianSource,
    ProtocolConfig,
    RateResult,
    SwapConfig,
    entanglement_fading,
    entanglement_swap,
    keyrate_collective,
    keyrate_fading,
    keyrate_fixed,
    log_negativity_standard_form,
    nongauss_keyrate,
    swap_fading,
)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_PHYSICS = 0, 2, 3, 4
SIG_DIGITS = 9


class NumericFailure(SatCVError, ArithmeticError):
    """A computed output field is NaN or infinite."""


# ---------------------------------------------------------------------------
# channel legs


def leg_distribution(leg: dict, base_dir: Path) -> FadingDistribution:
    model = leg["model"]
    if model == "fixed":
        return FadingDistribution.point_mass(math.sqrt(leg["tau"]))
    if model == "beam_wander":
        return FadingDistribution.from_beam_wander(
            BeamWanderParams(leg["sigma_b"], leg["aperture_radius"], leg["beam_spot"], leg.get("offset_d", 0.0))
        )
    if model == "diffraction":
        eta = downlink_transmissivity(
            DownlinkParams(leg["wavelength"], leg["telescope_diameter"], leg["range"], leg["receiver_aperture"])
        )
        return FadingDistribution.point_mass(eta)
    path = Path(leg["file"])
    if not path.is_absolute():
        path = base_dir / path
    if not path.exists():
        raise ValidationError(f"tabulated distribution file {path} does not exist")
    return FadingDistribution.from_csv(path, eta0=leg.get("eta0"))


def compose_reflect(up: FadingDistribution, down: FadingDistribution, n_bins: int) -> FadingDistribution:
    """Uplink fading followed by a fixed downlink: eta_total = eta_up * eta_down per bin."""
    eta_d, mass_d = down.bins(1)
    if eta_d.size != 1:
        raise ValidationError("reflect downlink must be a fixed channel")
    eta_d = float(eta_d[0])
    eta, mass = up.bins(n_bins)
    width = np.diff(up.edges(n_bins))
    keep = mass > 0
    eta, mass, width = eta[keep], mass[keep], width[keep]
    mass = mass / mass.sum()
    return FadingDistribution.tabulated(eta * eta_d, mass / (width * eta_d), width * eta_d, eta0=up.eta0 * eta_d)


def _mean_loss_db(dists: list[FadingDistribution], n_bins: int) -> float:
    t = 1.0
    for d in dists:
        eta, mass = d.bins(n_bins)
        t *= float(np.sum(mass * eta * eta)) if not d.is_parametric else d.expect(lambda e: e * e)
    return -10.0 * math.log10(t)


# ---------------------------------------------------------------------------
# per-point evaluation


def _protocol(data: dict) -> ProtocolConfig:
    return ProtocolConfig(**data.get("protocol", {}))


def _source_factory(src: dict):
    return NonGaussianSource(
        r=src["r"],
        operation=src.get("operation"),
        sides=src.get("sides", "both"),
        bs_tau=src.get("bs_tau", 0.95),
        k=src.get("k", 1),
        detector=src.get("detector", "pnr"),
        ideal=src.get("ideal", False),
        cutoff=src.get("cutoff", fk.DEFAULT_CUTOFF),
        source_efficiency=src.get("source_efficiency", 1.0),
    )


def evaluate_point(data: dict, metrics: list[str], base_dir: Path, seed: int, index: int) -> dict:
    """All requested metrics for one resolved config; keys are output column names."""
    scheme = data["scheme"]
    src = data["source"]
    chan = data["channel"]
    opts = data.get("metrics", {})
    n_bins = int(opts.get("n_bins", 200))
    scenario = opts.get("scenario", "per_eta")
    omega = float(chan.get("omega", 1.0))
    v_n = float(chan.get("v_n", 1.0))
    r = float(src["r"])
    v = math.cosh(2.0 * r)
    fock_source = src.get("kind", "tmsv") == "nongaussian"
    row: dict = {}

    legs = {name: leg_distribution(chan[name], base_dir) for name in ("uplink", "downlink", "arm_a", "arm_b") if name in chan}
    if scheme == "reflect":
        eff = compose_reflect(legs["uplink"], legs["downlink"], n_bins)
        loss_dists = [eff]
    elif scheme == "swap_relay":
        eff = None
        loss_dists = [legs["arm_a"], legs["arm_b"]]
    else:
        eff = legs[scheme if scheme != "dual_downlink" else "downlink"]
        loss_dists = [eff]
    second = None
    if scheme == "dual_downlink":
        second = leg_distribution(chan["downlink_b"], base_dir) if "downlink_b" in chan else eff
        loss_dists = [eff, second]

    for metric in metrics:
        if metric == "mean_loss_db":
            row["mean_loss_db"] = _mean_loss_db(loss_dists, n_bins)
        elif metric == "mc_mean_loss_db":
            leg = chan.get("uplink") or chan.get("downlink") or chan.get("arm_a")
            if leg["model"] != "beam_wander":
                raise ValidationError("mc_mean_loss_db needs a beam_wander leg")
            wander = BeamWanderParams(leg["sigma_b"], leg["aperture_radius"], leg["beam_spot"], leg.get("offset_d", 0.0))
            eta = sample_transmission(seed, int(opts.get("mc_samples", 100_000)), wander, stream=index)
            row["mc_mean_loss_db"] = -10.0 * math.log10(float(np.mean(eta * eta)))
        elif metric == "log_negativity":
            if scheme == "swap_relay":
                cfg = SwapConfig(r, float(src.get("r_b", r)), v_n=v_n)
                row["log_negativity"] = swap_fading(cfg, legs["arm_a"], legs["arm_b"], n_bins=min(n_bins, 50))
            else:
                source = _source_factory(src) if fock_source else v
                row["log_negativity"] = entanglement_fading(
                    source, eff, "log_negativity", scenario, second=second, v_n=v_n, n_bins=n_bins
                ).value
        elif metric == "ln_closed_form":
            row["ln_closed_form"] = _ln_closed_form(v, loss_dists, v_n, n_bins, scheme)
        elif metric == "key_rate":
            row.update(_key_rate_columns(data, v, eff, second, omega, scenario, n_bins, fock_source))
    return row


def _ln_closed_form(v, dists, v_n, n_bins, scheme) -> float:
    """Independent check: bin sum of the standard-form eigenvalue formula."""
    if scheme == "swap_relay":
        raise ValidationError("ln_closed_form is not defined for swap_relay")
    c0 = math.sqrt(v * v - 1.0)
    eta2, m2 = dists[0].bins(n_bins)
    if len(dists) == 1:
        t = eta2 * eta2
        return float(np.sum(m2 * log_negativity_standard_form(v, t * v + (1 - t) * v_n, np.sqrt(t) * c0)))
    eta1, m1 = dists[1].bins(n_bins)
    t1, t2 = np.meshgrid(eta1 * eta1, eta2 * eta2, indexing="ij")
    ln = log_negativity_standard_form(t1 * v + (1 - t1) * v_n, t2 * v + (1 - t2) * v_n, np.sqrt(t1 * t2) * c0)
    return float(np.sum(np.outer(m1, m2) * ln))


def _key_rate_columns(data, v, eff, second, omega, scenario, n_bins, fock_source) -> dict:
    if data["scheme"] == "swap_relay":
        raise UnsupportedConfigurationError("key rates for the relay scheme are not modelled")
    protocol = _protocol(data)
    if fock_source:
        res = nongauss_keyrate(_source_factory(data["source"]), eff, omega, protocol, n_bins=n_bins)
    elif second is not None:
        res = _dual_keyrate(v, eff, second, omega, protocol, min(n_bins, 50))
    else:
        res = keyrate_fading(v, eff, omega, protocol, scenario=scenario, n_bins=n_bins)
    return {
        "key_rate": res.key_rate,
        "key_rate_raw": res.key_rate_raw,
        "mutual_info": res.mutual_info,
        "holevo": res.holevo,
        "lower_bound": res.lower_bound,
    }


def _dual_keyrate(v, d1, d2, omega, protocol, n_bins):
    """Both modes travel through independent fading downlinks; per-bin rates floored."""
    e1, m1 = d1.bins(n_bins)
    e2, m2 = d2.bins(n_bins)
    k = raw = i_ab = i_e = 0.0
    for x, wa in zip(e1, m1):
        for y, wb in zip(e2, m2):
            cov = two_mode_transfer_cov(v, x * x, y * y, omega, omega)
            res = keyrate_collective(CovarianceState(np.zeros(4), cov), protocol)
            w = wa * wb
            k += w * res.key_rate
            raw += w * res.key_rate_raw
            i_ab += w * res.mutual_info
            i_e += w * res.holevo
    return RateResult(k, raw, i_ab, i_e, scenario="per_eta")


# ---------------------------------------------------------------------------
# reports


@dataclass
class RunReport:
    columns: list[str]
    rows: list[dict]
    metadata: dict
    timing_s: float = 0.0
    files: list[Path] = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        for key in sorted(self.metadata):
            buf.write(f"# meta: {key}={json.dumps(self.metadata[key], sort_keys=True)}\n")
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(self.columns)
        for row in self.rows:
            w.writerow([_fmt(row.get(c)) for c in self.columns])
        return buf.getvalue()

    def to_json(self) -> str:
        rows = [{c: _json_value(row.get(c)) for c in self.columns} for row in self.rows]
        return json.dumps({"metadata": self.metadata, "columns": self.columns, "rows": rows}, indent=2, sort_keys=True) + "\n"


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.{SIG_DIGITS}g}"
    return "" if x is None else str(x)


def _json_value(x):
    if isinstance(x, (float, np.floating)):
        return float(f"{float(x):.{SIG_DIGITS}g}")
    return x


def run_scenario(
    config: ScenarioConfig,
    out_dir: str | Path | None = None,
    fmt: str | None = None,
    seed: int | None = None,
    threads: int = 1,
    progress=None,
) -> RunReport:
    """Evaluate every sweep point; write CSV/JSON files when ``out_dir`` is given.

    Raises ``NumericFailure`` naming the first sweep point with a non-finite output.
    """
    t0 = time.perf_counter()
    seed = config.seed if seed is None else seed
    metrics = config.metrics
    points = config.sweep_points()
    sweep = config.data.get("sweep")

    def work(item):
        i, data = item
        row = evaluate_point(data, metrics, config.base_dir, seed, i)
        if progress:
            progress(f"point {i + 1}/{len(points)} done")
        return row

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        results = list(pool.map(work, enumerate(points)))

    rows = []
    for i, res in enumerate(results):
        for key, val in res.items():
            if isinstance(val, float) and not math.isfinite(val):
                where = f"{sweep['path']}={sweep['values'][i]}" if sweep else "single point"
                raise NumericFailure(f"{key} is {val} at sweep point {i} ({where})")
        row = {"index": i}
        if sweep:
            row[sweep["path"]] = float(sweep["values"][i])
        row.update(res)
        rows.append(row)
    columns = list(rows[0].keys())
    metadata = {"name": config.name, "scheme": config.scheme, "seed": seed, "version": __version__}
    report = RunReport(columns, rows, metadata, time.perf_counter() - t0)

    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        fmt = fmt or config.data.get("output", {}).get("format", "both")
        if fmt in ("csv", "both"):
            p = out / f"{config.name}.csv"
            p.write_text(report.to_csv(), newline="")
            report.files.append(p)
        if fmt in ("json", "both"):
            p = out / f"{config.name}.json"
            p.write_text(report.to_json())
            report.files.append(p)
    return report


# ---------------------------------------------------------------------------
# argument parsing


def _add_fading_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("channel")
    g.add_argument("--tau", type=float, help="fixed transmissivity (overrides fading flags)")
    g.add_argument("--sigma-b", type=float, help="beam-wandering standard deviation")
    g.add_argument("--aperture", type=float, default=1.0, help="aperture radius beta")
    g.add_argument("--beam-spot", type=float, help="beam-spot radius W")
    g.add_argument("--offset", type=float, default=0.0, help="beam-centre offset d")
    g.add_argument("--bins", type=int, default=200)


def _add_protocol_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("protocol")
    g.add_argument("--state-type", choices=["coherent", "squeezed"], default="coherent")
    g.add_argument("--detection", choices=["homodyne", "heterodyne"], default="homodyne")
    g.add_argument("--reconciliation", choices=["direct", "reverse"], default="reverse")
    g.add_argument("--efficiency", type=float, default=1.0)
    g.add_argument("--omega", type=float, default=1.0)


def _flag_distribution(args) -> FadingDistribution:
    if args.tau is not None:
        if not 0 < args.tau <= 1:
            raise ValidationError("--tau must lie in (0, 1]")
        return FadingDistribution.point_mass(math.sqrt(args.tau))
    if args.sigma_b is None or args.beam_spot is None:
        raise ValidationError("give --tau or both --sigma-b and --beam-spot")
    return FadingDistribution.from_beam_wander(BeamWanderParams(args.sigma_b, args.aperture, args.beam_spot, args.offset))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="satcv", description="CV quantum communication over satellite channels")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a TOML scenario")
    sim.add_argument("config")
    sim.add_argument("--out", help="output directory (default: CSV on stdout)")
    sim.add_argument("--format", choices=["csv", "json", "both"])
    sim.add_argument("--seed", type=int)
    sim.add_argument("--threads", type=int, default=1)

    ch = sub.add_parser("channel", help="fading pdf table and mean loss")
    _add_fading_flags(ch)
    ch.add_argument("--format", choices=["csv", "json"], default="csv")

    kr = sub.add_parser("keyrate", help="key rate for one channel")
    kr.add_argument("--r", type=float, help="source squeezing")
    kr.add_argument("--v", type=float, help="TMSV variance (alternative to --r)")
    kr.add_argument("--scenario", choices=["per_eta", "ensemble"], default="per_eta")
    _add_fading_flags(kr)
    _add_protocol_flags(kr)

    en = sub.add_parser("entangle", help="log-negativity after one channel")
    en.add_argument("--r", type=float, required=True)
    en.add_argument("--scenario", choices=["per_eta", "ensemble"], default="per_eta")
    en.add_argument("--v-n", type=float, default=1.0)
    _add_fading_flags(en)

    sw = sub.add_parser("swap", help="entanglement swapping at a relay")
    sw.add_argument("--r-a", type=float, required=True)
    sw.add_argument("--r-b", type=float)
    sw.add_argument("--tau-a", type=float, default=1.0)
    sw.add_argument("--tau-b", type=float, default=1.0)
    sw.add_argument("--v-n", type=float, default=1.0)

    ng = sub.add_parser("nongauss", help="heralded non-Gaussian source key rate")
    ng.add_argument("--r", type=float, required=True)
    ng.add_argument("--operation", choices=["subtract", "add", "replace"])
    ng.add_argument("--sides", choices=["mode1", "mode2", "both"], default="both")
    ng.add_argument("--bs-tau", type=float, default=0.95)
    ng.add_argument("--k", type=int, default=1)
    ng.add_argument("--cutoff", type=int, default=fk.DEFAULT_CUTOFF)
    _add_fading_flags(ng)
    _add_protocol_flags(ng)
    return parser


def _emit(obj: dict) -> None:
    print(json.dumps({k: _json_value(v) for k, v in obj.items()}, sort_keys=True))


def _run(args) -> None:
    if args.command == "simulate":
        cfg = load_config(args.config)
        report = run_scenario(
            cfg,
            args.out,
            args.format,
            args.seed,
            args.threads,
            progress=lambda msg: print(msg, file=sys.stderr),
        )
        if args.out is None:
            sys.stdout.write(report.to_json() if args.format == "json" else report.to_csv())
        else:
            for p in report.files:
                print(f"wrote {p}", file=sys.stderr)
        return

    if args.command == "channel":
        dist = _flag_distribution(args)
        if args.format == "csv":
            sys.stdout.write(dist.to_csv(n_bins=args.bins))
        eta, mass = dist.bins(args.bins)
        loss = _mean_loss_db([dist], args.bins)
        if args.format == "json":
            _emit({"eta0": dist.eta0, "mean_loss_db": loss})
        else:
            print(f"# mean_loss_db={_fmt(loss)}", file=sys.stderr)
        return

    if args.command == "keyrate":
        if (args.r is None) == (args.v is None):
            raise ValidationError("give exactly one of --r or --v")
        v = args.v if args.v is not None else math.cosh(2 * args.r)
        protocol = ProtocolConfig(args.state_type, args.detection, args.reconciliation, args.efficiency)
        if args.tau is not None:
            res = keyrate_fixed(v, ChannelPoint(args.tau, args.omega), protocol)
        else:
            res = keyrate_fading(v, _flag_distribution(args), args.omega, protocol, args.scenario, n_bins=args.bins)
        d = res.to_dict()
        d.pop("per_eta_curve")
        _emit(d)
        return

    if args.command == "entangle":
        res = entanglement_fading(
            math.cosh(2 * args.r), _flag_distribution(args), "log_negativity", args.scenario, v_n=args.v_n, n_bins=args.bins
        )
        _emit({"log_negativity": res.value, "scenario": res.scenario, "label": res.label})
        return

    if args.command == "swap":
        cfg = SwapConfig(args.r_a, args.r_b if args.r_b is not None else args.r_a, args.tau_a, args.tau_b, args.v_n)
        cov = entanglement_swap(cfg).cov
        print(json.dumps({"log_negativity": _json_value(log_negativity_gaussian(cov)),
                          "cov": [[_json_value(x) for x in row] for row in cov]}, sort_keys=True))
        return

    if args.command == "nongauss":
        protocol = ProtocolConfig(args.state_type, args.detection, args.reconciliation, args.efficiency)
        src = NonGaussianSource(args.r, args.operation, args.sides, args.bs_tau, args.k, cutoff=args.cutoff)
        res = nongauss_keyrate(src, _flag_distribution(args), args.omega, protocol, n_bins=args.bins)
        d = res.to_dict()
        d.pop("per_eta_curve")
        _emit(d)
        return


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        _run(args)
    except (ValidationError, UnsupportedConfigurationError, DomainError, PreconditionError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericFailure, FloatingPointError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (HeraldImpossibleError, PhysicalityError, TruncationError) as exc:
        print(f"physics error: {exc}", file=sys.stderr)
        return EXIT_PHYSICS
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
