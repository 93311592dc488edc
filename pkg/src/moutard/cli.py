"""Command-line front end: presets, transforms, verification sweeps, tables.

Exit codes: 0 success, 2 configuration error, 3 verification failure,
4 determinant below threshold everywhere.

Output contracts (byte-stable for identical configs, apart from
``runtime_ms`` in the JSON report):

* field CSV: header ``x,y,re,im``; rows in row-major order with y outer;
  values printed with 17 significant digits; LF line endings;
* ``report.json``: keys ``residual_orders``, ``det_min``,
  ``masked_fraction``, ``sigma``, ``pole_radius``, ``decay_constant``,
  ``oracle_max_error``, ``runtime_ms`` (plus preset-specific extras),
  null where not computed;
* ``sweep.csv``: header ``value,sigma,pole_radius,decay_constant`` with
  ``no-pole`` in the radius column when there is no radial pole.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import config, dirac, examples, ga, verify
from .config import ConfigError, RunConfig
from .expr import ExprEvalError, ExprSyntaxError, parse
from .grid import Domain, GridError, GridField, SampleError, sample
from .potentials import check_closedness, omega_integrand

__all__ = ["main", "cmd_example", "cmd_transform", "cmd_verify", "cmd_sweep"]


def _fmt17(x: float) -> str:
    return format(float(x), ".17g")


def write_field_csv(path, field: GridField) -> None:
    d = field.domain
    xs = [_fmt17(x) for x in d.xs()]
    ys = [_fmt17(y) for y in d.ys()]
    v = field.values
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("x,y,re,im\n")
        for j in range(d.n_y):
            row = v[j]
            yj = ys[j]
            for i in range(d.n_x):
                fh.write(f"{xs[i]},{yj},{_fmt17(row[i].real)},{_fmt17(row[i].imag)}\n")


def base_report() -> dict:
    return {
        "residual_orders": None,
        "det_min": None,
        "masked_fraction": None,
        "sigma": None,
        "pole_radius": None,
        "decay_constant": None,
        "oracle_max_error": None,
        "runtime_ms": None,
    }


def write_report(path, report: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(json.dumps(report, indent=2, sort_keys=True))
        fh.write("\n")


@dataclass
class PipelineRun:
    cfg: RunConfig
    domain: Domain
    u: GridField
    seeds: list[ga.GASeed]
    result: object            # GATransformResult (ga) or TransformResult (dirac)
    level: str

    @property
    def mask(self) -> np.ndarray:
        return self.result.mask

    @property
    def det(self) -> GridField:
        return self.result.det


def _domain_of(cfg: RunConfig, n: int | None = None) -> Domain:
    x0, x1, y0, y1 = cfg.domain
    nx, ny = (n, n) if n is not None else cfg.grid
    try:
        return Domain(x0, x1, y0, y1, nx, ny)
    except GridError as exc:
        raise ConfigError(str(exc)) from None


def _alphas_of(cfg: RunConfig) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    n = cfg.n
    alphas = np.array([[cfg.alpha_at(j, k) for k in range(1, n + 1)]
                       for j in range(1, n + 1)], dtype=float).reshape(n, n)
    alphas0 = np.array([cfg.alpha_at(0, k) for k in range(1, n + 1)], dtype=float)
    alphas0t = np.array([cfg.alpha_at(j, 0) for j in range(1, n + 1)], dtype=float)
    return alphas, alphas0, alphas0t


def run_pipeline(cfg: RunConfig, domain: Domain | None = None) -> PipelineRun:
    """Build fields from the configuration and run the requested transform."""
    d = domain if domain is not None else _domain_of(cfg)
    u = sample(parse(cfg.u_expr), d)
    psi0 = sample(parse(cfg.target_psi0), d)
    psip0 = sample(parse(cfg.target_psip0), d)
    seeds = [
        ga.GASeed(sample(parse(psi_src), d), sample(parse(psip_src), d), j)
        for j, (psi_src, psip_src) in sorted(cfg.seeds.items())
    ]
    alphas, alphas0, alphas0t = _alphas_of(cfg)
    basepoint = complex(*cfg.basepoint) if cfg.basepoint else None
    anchor = complex(*cfg.anchor) if cfg.anchor else None

    if cfg.level == "ga":
        result = ga.ga_transform(u, seeds, alphas, psi0, psip0, alphas0, alphas0t,
                                 basepoint, anchor, cfg.eps_sing)
    else:
        v = sample(parse(cfg.v_expr), d) if cfg.v_expr else u.conj()
        lifted = [ga.lift_seed(s) for s in seeds]
        result = dirac.transform(lifted, u, v, ga.lift(psi0), ga.lift(psip0),
                                 1j * alphas, 1j * alphas0, 1j * alphas0t,
                                 basepoint, anchor, cfg.eps_sing)
    return PipelineRun(cfg, d, u, seeds, result, cfg.level)


def _write_fields(run: PipelineRun, out_dir: Path) -> None:
    res = run.result
    if run.level == "ga":
        write_field_csv(out_dir / "u_tilde.csv", res.u_t)
        write_field_csv(out_dir / "psi_tilde.csv", res.psi_t)
        write_field_csv(out_dir / "psip_tilde.csv", res.psip_t)
    else:
        write_field_csv(out_dir / "u_tilde.csv", res.u_t)
        write_field_csv(out_dir / "v_tilde.csv", res.v_t)
        write_field_csv(out_dir / "psi1_tilde.csv", res.psi_t.psi1)
        write_field_csv(out_dir / "psi2_tilde.csv", res.psi_t.psi2)
        write_field_csv(out_dir / "psip1_tilde.csv", res.psip_t.psi1)
        write_field_csv(out_dir / "psip2_tilde.csv", res.psip_t.psi2)
    write_field_csv(out_dir / "det_omega.csv", res.det)


def _common_stats(run: PipelineRun, report: dict) -> None:
    report["det_min"] = float(np.min(np.abs(run.det.values)))
    report["masked_fraction"] = float(np.mean(run.mask))


def _scaled_error(field: GridField, oracle: np.ndarray, mask: np.ndarray) -> float:
    """Max of |field - oracle| / max(|oracle|, 1) over unmasked nodes."""
    keep = ~mask
    diff = np.abs(field.values[keep] - oracle[keep])
    scale = np.maximum(np.abs(oracle[keep]), 1.0)
    return float(np.max(diff / scale)) if diff.size else float("nan")


def _line_params(cfg: RunConfig) -> examples.LinePoleParams:
    psi_src, psip_src = cfg.seeds[1]
    return examples.LinePoleParams(
        f=parse(psi_src),
        f_plus=parse(psip_src),
        psi0=parse(cfg.target_psi0),
        psip0=parse(cfg.target_psip0),
        alpha_11=cfg.alpha_at(1, 1),
        alpha_01=cfg.alpha_at(0, 1),
        alpha_10=cfg.alpha_at(1, 0),
    )


def _circle_params(cfg: RunConfig) -> examples.CirclePoleParams:
    consts = {}
    for j in (1, 2):
        if j not in cfg.seeds:
            raise ConfigError(f"circle-pole family needs seed.{j}.psi / seed.{j}.psip")
        psi_src, psip_src = cfg.seeds[j]
        for name, src in ((f"seed.{j}.psi", psi_src), (f"seed.{j}.psip", psip_src)):
            coeffs = examples.polynomial_coefficients(parse(src))
            if coeffs is None or len(coeffs) > 1:
                raise ConfigError(f"{name}: circle-pole family needs constant seeds")
            consts[name] = coeffs[0]
    alpha = [[cfg.alpha_at(j, k) for k in range(3)] for j in range(3)]
    return examples.CirclePoleParams(
        f1=consts["seed.1.psi"], f1_plus=consts["seed.1.psip"],
        f2=consts["seed.2.psi"], f2_plus=consts["seed.2.psip"],
        alpha=alpha,
        psi0=parse(cfg.target_psi0),
        psip0=parse(cfg.target_psip0),
    )


def _overrides_from(args) -> dict[str, str]:
    overrides: dict[str, str] = {}
    for item in getattr(args, "overrides", []) or []:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        key, value = item.split("=", 1)
        overrides[key.strip()] = value.strip()
    if getattr(args, "out_dir", None):
        overrides["out_dir"] = args.out_dir
    return overrides


def cmd_example(args) -> int:
    """Run a named preset, write its fields, report oracle agreement."""
    name = args.name
    if name not in examples.PRESETS:
        raise ConfigError(
            f"unknown example {name!r}; available: {', '.join(sorted(examples.PRESETS))}"
        )
    pairs = config.parse_pairs(examples.PRESETS[name])
    pairs.update(_overrides_from(args))
    cfg = config.build_config(pairs)

    t0 = time.perf_counter()
    run = run_pipeline(cfg)
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_fields(run, out_dir)

    report = base_report()
    _common_stats(run, report)
    z = run.domain.zgrid()
    res = run.result
    singular = verify.locate_singular_set(res.det, res.eps_sing)

    if name == "ex1-line-pole":
        forms = examples.ex1_closed_forms(_line_params(cfg))
        # closed forms blow up on the (masked) pole set; compare off-mask only
        with np.errstate(all="ignore"):
            report["oracle_max_error"] = max(
                _scaled_error(res.u_t, np.asarray(forms.u_t(z)), res.mask),
                _scaled_error(res.psi_t, np.asarray(forms.psi_t(z)), res.mask),
                _scaled_error(res.psip_t, np.asarray(forms.psip_t(z)), res.mask),
            )
        if singular.points:
            report["pole_line_im"] = float(np.mean([p.imag for p in singular.points]))
        else:
            report["pole_line_im"] = None
    elif name == "ex2-circle-pole":
        params = _circle_params(cfg)
        forms = examples.ex2_closed_forms(params)
        with np.errstate(all="ignore"):
            report["oracle_max_error"] = max(
                _scaled_error(res.u_t, np.asarray(forms.u_t(z)), res.mask),
                _scaled_error(res.psi_t, np.asarray(forms.psi_t(z)), res.mask),
                _scaled_error(res.psip_t, np.asarray(forms.psip_t(z)), res.mask),
                _scaled_error(res.det, np.asarray(forms.det(z)), res.mask),
            )
        sigma, radius = examples.ex2_sigma_and_circle(params)
        report["sigma"] = sigma
        report["pole_radius"] = radius
        report["decay_constant"] = examples.ex2_decay_limit(params)
        if singular.points:
            radii = np.abs(np.asarray(singular.points))
            report["contour_radius_mean"] = float(np.mean(radii))
            report["contour_radius_std"] = float(np.std(radii))

    report["runtime_ms"] = 1000.0 * (time.perf_counter() - t0)
    write_report(out_dir / "report.json", report)
    return 0


def cmd_transform(args) -> int:
    """Run the generic pipeline from a config file and write its outputs."""
    cfg = config.load_config(args.config_path)
    t0 = time.perf_counter()
    run = run_pipeline(cfg)
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_fields(run, out_dir)
    report = base_report()
    _common_stats(run, report)
    report["runtime_ms"] = 1000.0 * (time.perf_counter() - t0)
    write_report(out_dir / "report.json", report)
    return 0


def _closedness_max(run: PipelineRun) -> float:
    lifted = [ga.lift_seed(s) for s in run.seeds]
    worst = 0.0
    for sj in lifted:
        for sk in lifted:
            worst = max(worst, check_closedness(omega_integrand(sj, sk)))
    return worst


def _residuals_for_verify(run: PipelineRun) -> dict[str, float]:
    res = run.result
    cfg = run.cfg
    if run.level == "ga":
        u_t, psi_t, psip_t = res.u_t, res.psi_t, res.psip_t
        d_res = res.dirac
    else:
        u_t = res.u_t
        d_res = res
        psi_t = psip_t = None
    if cfg.corrupt_u is not None:
        u_t = u_t * cfg.corrupt_u
    out: dict[str, float] = {}
    if psi_t is not None:
        out["ga"] = verify.max_norm(verify.residual_ga(u_t, psi_t), res.mask)
        out["ga_conj"] = verify.max_norm(verify.residual_ga_conjugate(u_t, psip_t), res.mask)
    out["dirac"] = verify.max_norm(
        verify.residual_dirac(u_t, d_res.v_t, d_res.psi_t), res.mask)
    out["dirac_conj"] = verify.max_norm(
        verify.residual_dirac_conjugate(u_t, d_res.v_t, d_res.psip_t), res.mask)
    if run.seeds:
        out["closedness"] = _closedness_max(run)
    return out


def cmd_verify(args) -> int:
    """Three-grid convergence study; exit 3 when any fitted order is too low."""
    cfg = config.load_config(args.config_path)
    if len(cfg.grids) < 3:
        raise ConfigError("grids: need at least 3 sizes for an order fit")
    t0 = time.perf_counter()
    hs: list[float] = []
    series: dict[str, list[float]] = {}
    last_run = None
    for n in cfg.grids:
        run = run_pipeline(cfg, _domain_of(cfg, n))
        hs.append(run.domain.h_max)
        for key, value in _residuals_for_verify(run).items():
            series.setdefault(key, []).append(value)
        last_run = run
    orders = {key: verify.fit_order(hs, vals) for key, vals in series.items()}

    report = base_report()
    report["residual_orders"] = orders
    _common_stats(last_run, report)
    report["runtime_ms"] = 1000.0 * (time.perf_counter() - t0)
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_report(out_dir / "report.json", report)

    failed = [k for k, v in orders.items()
              if v != verify.EXACT
              and (not np.isfinite(float(v)) or float(v) < verify.ORDER_MIN)]
    if failed:
        print(f"verification failed: order below {verify.ORDER_MIN} for "
              f"{', '.join(sorted(failed))}", file=sys.stderr)
        return 3
    return 0


def _sweep_alpha(cfg: RunConfig, value: float) -> dict[tuple[int, int], float]:
    alpha = dict(cfg.alpha)
    param = cfg.sweep_param
    if param == "beta":
        alpha[(1, 2)] = value
        alpha[(2, 1)] = -value
    elif param == "alpha":
        alpha[(1, 1)] = value
        alpha[(2, 2)] = value
    else:
        parts = (param or "").split(".")
        if len(parts) == 3 and parts[0] == "alpha":
            try:
                j, k = int(parts[1]), int(parts[2])
            except ValueError:
                raise ConfigError(f"sweep.param: bad indices in {param!r}") from None
            alpha[(j, k)] = value
        else:
            raise ConfigError(
                f"sweep.param: expected 'beta', 'alpha' or 'alpha.<j>.<k>', got {param!r}")
    return alpha


def cmd_sweep(args) -> int:
    """Tabulate pole geometry of the circle-pole family over swept constants."""
    cfg = config.load_config(args.config_path)
    if cfg.sweep_param is None:
        raise ConfigError("missing required key 'sweep.param'")
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    lines = ["value,sigma,pole_radius,decay_constant"]
    for value in cfg.sweep_values:
        swept = dataclasses.replace(cfg, alpha=_sweep_alpha(cfg, value))
        params = _circle_params(swept)
        sigma, radius = examples.ex2_sigma_and_circle(params)
        decay = examples.ex2_decay_limit(params)
        radius_txt = "no-pole" if radius is None else _fmt17(radius)
        lines.append(f"{_fmt17(value)},{_fmt17(sigma)},{radius_txt},{_fmt17(decay)}")
    with open(out_dir / "sweep.csv", "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines))
        fh.write("\n")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="moutard",
        description="Transforms of two-dimensional Dirac systems and "
                    "generalized analytic functions on rectangular grids.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("example", help="run a named preset")
    p.add_argument("name")
    p.add_argument("overrides", nargs="*", metavar="key=value")
    p.add_argument("--out-dir", default=None)

    p = sub.add_parser("transform", help="run a transform from a config file")
    p.add_argument("config_path")

    p = sub.add_parser("verify", help="three-grid residual convergence study")
    p.add_argument("config_path")

    p = sub.add_parser("sweep", help="pole-geometry table over swept constants")
    p.add_argument("config_path")

    return parser


_COMMANDS = {
    "example": cmd_example,
    "transform": cmd_transform,
    "verify": cmd_verify,
    "sweep": cmd_sweep,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, GridError, SampleError, ExprSyntaxError, ExprEvalError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except dirac.SingularGridError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
