"""Scenario orchestration: closed-loop runs, comparison reports, CSV traces.

A Scenario bundles one plant, one disturbance, one controller kind and its
gains, and the integration setup.  `run_scenario` advances everything on a
single fixed step:

    1. sample the disturbance;
    2. (adaptive kind) EKF predict with the input averaged over the elapsed
       measurement interval, then correct with the noisy position sample;
    3. form the drift value f from the feedback state (true state, or the
       filter estimate with its stiffness estimate in the adaptive kind);
    4. read the disturbance estimate and sliding stack, evaluate the
       control law for the kind (plus the actuator clamp where configured);
    5. log the decimated sample;
    6. advance the truth plant (explicit Euler by default, RK4 optional);
    7. advance the observer with the forcing the plant actually received
       (g(x)*u in the plain loop, v_r in the saturated loops), re-anchored
       against the freshest feedback state.

Runs are deterministic for a fixed seed.  The per-run report carries the
discrete-sample norms of the input and output error (plus the estimation
error and the pre-clamp command where they exist) and the windowed
settling time.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .controller import (
    SmcGains,
    TsmcGains,
    saturated_tsmc_control,
    sliding_stack_n2,
    smc_control,
    tsmc_control,
)
from .estimator import EkfConfig, EkfState, ekf_predict, ekf_update
from .mathcore import Trace, l2_norm, linf_norm, settling_time
from .observer import (
    ObserverGains,
    disturbance_estimate,
    observer_advance,
    observer_init,
)
from .plant import DisturbanceSpec, PlantParams, disturbance_value, plant_derivative

__all__ = [
    "KINDS",
    "Scenario",
    "RunReport",
    "DivergenceError",
    "run_scenario",
    "compare_controllers",
    "format_report_table",
    "report_csv_rows",
    "export_trace",
    "read_trace",
]

KINDS = ("tsmc", "tsmc_saturated", "adaptive_tsmc_saturated", "smc_baseline")

DIVERGENCE_LIMIT = 1e6


class DivergenceError(RuntimeError):
    """State blew past the divergence guard; carries the partial trace."""

    def __init__(self, message: str, trace: Trace, t: float, peak: float):
        super().__init__(message)
        self.trace = trace
        self.t = t
        self.peak = peak


@dataclass(frozen=True)
class Scenario:
    """One closed-loop experiment definition."""

    kind: str
    plant: PlantParams
    disturbance: DisturbanceSpec
    x0: tuple[float, float]
    dt: float = 1e-4
    horizon: float = 8.0
    decimation: int = 10
    seed: int = 0
    tsmc: TsmcGains | None = None
    observer: ObserverGains | None = None
    ekf: EkfConfig | None = None
    smc: SmcGains | None = None
    smc_k1_nominal: float | None = None
    threshold_fraction: float = 0.02
    hold_duration: float = 0.5
    integrator: str = "euler"
    perfect_observer: bool = False
    z0_offset: float = 0.0
    process_noise: bool = False
    label: str = "run"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown scenario kind {self.kind!r}; expected one of {KINDS}")
        if not (self.dt > 0.0):
            raise ValueError(f"dt must be > 0, got {self.dt}")
        if not (self.horizon > self.dt):
            raise ValueError("horizon must exceed dt")
        if self.decimation < 1:
            raise ValueError("decimation must be >= 1")
        if self.integrator not in ("euler", "rk4"):
            raise ValueError(f"unknown integrator {self.integrator!r}")
        if self.kind == "smc_baseline":
            if self.smc is None:
                raise ValueError("smc_baseline needs [smc] gains")
            if self.smc_k1_nominal is None:
                raise ValueError("smc_baseline needs a nominal K1 value")
        else:
            if self.tsmc is None:
                raise ValueError(f"kind {self.kind} needs sliding-mode gains")
            if self.observer is None and not self.perfect_observer:
                raise ValueError(f"kind {self.kind} needs observer gains")
            if self.tsmc.n != 2:
                raise ValueError("scenarios drive the second-order plant (n = 2)")
        if self.kind in ("tsmc_saturated", "adaptive_tsmc_saturated"):
            if self.tsmc.tau is None or self.tsmc.sat is None:
                raise ValueError(f"kind {self.kind} needs tau and saturation bounds")
        if self.kind == "adaptive_tsmc_saturated":
            if self.ekf is None:
                raise ValueError("adaptive kind needs an [ekf] section")
            if not (self.ekf.Ts > 0.0):
                raise ValueError("adaptive kind needs ekf Ts > 0")
            stride = self.ekf.Ts / self.dt
            if abs(stride - round(stride)) > 1e-9 or round(stride) < 1:
                raise ValueError(
                    f"ekf Ts={self.ekf.Ts} must be a whole multiple of dt={self.dt}"
                )
        if self.process_noise and self.ekf is None:
            raise ValueError("process_noise needs an [ekf] section for its covariances")


@dataclass
class RunReport:
    """Per-run metrics: discrete-sample norms, settling time, diagnostics."""

    label: str
    kind: str
    u_l2: float = 0.0
    u_linf: float = 0.0
    ey_l2: float = 0.0
    ey_linf: float = 0.0
    uc_l2: float | None = None
    uc_linf: float | None = None
    ex_l2: float | None = None
    ex_linf: float | None = None
    t_s: float | None = None
    failed: str | None = None
    diagnostics: list[str] = field(default_factory=list)
    trace_path: str | None = None


def run_scenario(sc: Scenario) -> tuple[Trace, RunReport]:
    """Integrate one scenario; returns the decimated trace and its report."""
    pp = sc.plant
    adaptive = sc.kind == "adaptive_tsmc_saturated"
    saturated = sc.kind in ("tsmc_saturated", "adaptive_tsmc_saturated")
    smc_kind = sc.kind == "smc_baseline"
    has_observer = not smc_kind and not sc.perfect_observer

    n_steps = int(round(sc.horizon / sc.dt))
    dt = sc.dt
    rng = np.random.default_rng(np.random.SeedSequence([sc.seed]))

    x1, x2 = float(sc.x0[0]), float(sc.x0[1])
    obs = None
    ekf_state = None
    stride = 0
    meas_std = 0.0
    pn1 = pn2 = 0.0
    innov = 0.0
    if adaptive:
        cfg = sc.ekf
        ekf_state = EkfState(x_hat=cfg.x0_hat.copy(), P=cfg.P0.copy())
        stride = int(round(cfg.Ts / dt))
        meas_std = math.sqrt(cfg.R)
        if sc.process_noise:
            pn1 = math.sqrt(cfg.Q[0, 0] * dt / cfg.Ts)
            pn2 = math.sqrt(cfg.Q[1, 1] * dt / cfg.Ts)

    cols: dict[str, list[float]] = {"t": [], "x1": [], "x2": [], "u": [], "d": []}
    if smc_kind:
        for name in ("s", "u_eq", "u_c"):
            cols[name] = []
    else:
        for name in ("d_hat", "s", "s2"):
            cols[name] = []
        if saturated:
            for name in ("v_r", "u_c"):
                cols[name] = []
        if adaptive:
            for name in ("x1_hat", "x2_hat", "K1_hat", "e_x", "innov", "P_trace"):
                cols[name] = []

    u = 0.0
    u_acc = 0.0
    n_acc = 0
    max_abs_d = 0.0

    def build_trace() -> Trace:
        return Trace(dt=dt * sc.decimation, columns={k: np.asarray(v) for k, v in cols.items()})

    for i in range(n_steps):
        t = i * dt
        d = disturbance_value(sc.disturbance, t)
        if abs(d) > max_abs_d:
            max_abs_d = abs(d)

        if adaptive and i % stride == 0:
            if i > 0:
                u_mean = u_acc / n_acc if n_acc else u
                ekf_state = ekf_predict(ekf_state, u_mean, sc.ekf, pp.K2, pp.g)
            u_acc = 0.0
            n_acc = 0
            y = x1 + meas_std * rng.standard_normal()
            ekf_state, innov = ekf_update(ekf_state, y, sc.ekf)

        if adaptive:
            fb1 = float(ekf_state.x_hat[0])
            fb2 = float(ekf_state.x_hat[1])
            k1_fb = float(ekf_state.x_hat[2])
        else:
            fb1, fb2, k1_fb = x1, x2, pp.K1

        if smc_kind:
            out = smc_control((x1, x2), sc.smc, pp, sc.smc_k1_nominal)
            u = out.u
            forcing = 0.0
            if i % sc.decimation == 0:
                cols["t"].append(t)
                cols["x1"].append(x1)
                cols["x2"].append(x2)
                cols["u"].append(u)
                cols["d"].append(d)
                cols["s"].append(out.s)
                cols["u_eq"].append(out.u_eq)
                cols["u_c"].append(out.u_c)
        else:
            fx = -k1_fb * fb1 - pp.K2 * fb1**3
            if has_observer:
                if obs is None:
                    obs = observer_init(fb2, fx, sc.z0_offset, sc.observer)
                d_hat = disturbance_estimate(obs, fx, sc.observer)
                s_obs = obs.s
            else:
                d_hat = d
                s_obs = 0.0
            stack = sliding_stack_n2((fb1, fb2), 0.0, s_obs, sc.tsmc)
            pp_fb = pp if k1_fb == pp.K1 else replace(pp, K1=k1_fb)
            if saturated:
                v_r, u_c, u = saturated_tsmc_control((fb1, fb2), d_hat, stack, pp_fb, sc.tsmc)
                forcing = v_r
            else:
                u = tsmc_control((fb1, fb2), d_hat, stack, pp_fb, sc.tsmc)
                forcing = -pp.g * u
            if i % sc.decimation == 0:
                cols["t"].append(t)
                cols["x1"].append(x1)
                cols["x2"].append(x2)
                cols["u"].append(u)
                cols["d"].append(d)
                cols["d_hat"].append(d_hat)
                cols["s"].append(s_obs)
                cols["s2"].append(stack.s_n)
                if saturated:
                    cols["v_r"].append(v_r)
                    cols["u_c"].append(u_c)
                if adaptive:
                    cols["x1_hat"].append(fb1)
                    cols["x2_hat"].append(fb2)
                    cols["K1_hat"].append(k1_fb)
                    cols["e_x"].append(x1 - fb1)
                    cols["innov"].append(innov)
                    cols["P_trace"].append(float(np.trace(ekf_state.P)))

        if sc.integrator == "rk4":
            x1, x2 = _rk4_step(x1, x2, u, t, dt, pp, sc.disturbance)
        else:
            dx1, dx2 = plant_derivative((x1, x2), u, d, pp)
            x1 += dt * dx1
            x2 += dt * dx2
        if adaptive and sc.process_noise:
            x1 += pn1 * rng.standard_normal()
            x2 += pn2 * rng.standard_normal()

        if has_observer:
            x_n = fb2 if adaptive else x2
            obs = observer_advance(obs, x_n, fx, forcing, sc.observer, dt)

        u_acc += u
        n_acc += 1

        if not (math.isfinite(x1) and math.isfinite(x2)) or max(abs(x1), abs(x2)) > DIVERGENCE_LIMIT:
            peak = max(abs(x1), abs(x2)) if math.isfinite(x1) and math.isfinite(x2) else math.inf
            raise DivergenceError(
                f"state diverged at t={t:.4f} (|x| reached {peak:.3g})",
                build_trace(),
                t,
                peak,
            )

    trace = build_trace()
    report = RunReport(label=sc.label, kind=sc.kind)
    report.u_l2 = l2_norm(trace, "u")
    report.u_linf = linf_norm(trace, "u")
    report.ey_l2 = l2_norm(trace, "x1")
    report.ey_linf = linf_norm(trace, "x1")
    if saturated:
        report.uc_l2 = l2_norm(trace, "u_c")
        report.uc_linf = linf_norm(trace, "u_c")
    if adaptive:
        report.ex_l2 = l2_norm(trace, "e_x")
        report.ex_linf = linf_norm(trace, "e_x")
    report.t_s = settling_time(trace, sc.threshold_fraction, sc.hold_duration)
    # the plain observer estimates the raw external disturbance, so its
    # amplitude-bound assumption is checkable against the realized signal
    if sc.kind == "tsmc" and has_observer and max_abs_d > sc.observer.beta0:
        msg = (
            f"disturbance magnitude reached {max_abs_d:.4g}, exceeding the observer "
            f"bound beta0={sc.observer.beta0:.4g}"
        )
        report.diagnostics.append(msg)
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
    return trace, report


def _rk4_step(x1, x2, u, t, dt, pp: PlantParams, spec: DisturbanceSpec):
    # classic RK4 on the truth with the input held over the step and the
    # disturbance evaluated at the substage times
    def f(xa, xb, tt):
        return plant_derivative((xa, xb), u, disturbance_value(spec, tt), pp)

    k1 = f(x1, x2, t)
    k2 = f(x1 + 0.5 * dt * k1[0], x2 + 0.5 * dt * k1[1], t + 0.5 * dt)
    k3 = f(x1 + 0.5 * dt * k2[0], x2 + 0.5 * dt * k2[1], t + 0.5 * dt)
    k4 = f(x1 + dt * k3[0], x2 + dt * k3[1], t + dt)
    return (
        x1 + dt / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]),
        x2 + dt / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]),
    )


def compare_controllers(
    entries: list[tuple[str, Scenario]],
    out_dir: Path | str | None = None,
) -> tuple[list[RunReport], str]:
    """Run every scenario, export traces, and build the comparison table.

    A divergent run is reported as a failed row; the other rows proceed.
    Trace references inside the report are file names only, so two output
    directories produced with the same seeds match byte for byte.
    """
    out = Path(out_dir) if out_dir is not None else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
    reports: list[RunReport] = []
    for label, sc in entries:
        sc = replace(sc, label=label)
        try:
            trace, report = run_scenario(sc)
        except DivergenceError as err:
            report = RunReport(label=label, kind=sc.kind, failed=str(err))
            trace = err.trace
        if out is not None:
            path = out / f"{label}.csv"
            export_trace(trace, path)
            report.trace_path = path.name
        reports.append(report)
    text = format_report_table(reports)
    if out is not None:
        (out / "report.txt").write_text(text, newline="\n")
        (out / "report.csv").write_text(report_csv_rows(reports), newline="\n")
    return reports, text


_TABLE_COLUMNS = (
    ("||u||2", "u_l2"),
    ("||u||inf", "u_linf"),
    ("||e_y||2", "ey_l2"),
    ("||e_y||inf", "ey_linf"),
    ("||e_x||2", "ex_l2"),
    ("||e_x||inf", "ex_linf"),
    ("||u_c||2", "uc_l2"),
    ("||u_c||inf", "uc_linf"),
)


def format_report_table(reports: list[RunReport]) -> str:
    """Aligned plain-text comparison table, one row per run."""
    header = f"{'scenario':<26}" + "".join(f"{name:>12}" for name, _ in _TABLE_COLUMNS)
    header += f"{'t_s':>14}  trace"
    lines = [header]
    for r in reports:
        if r.failed is not None:
            lines.append(f"{r.label:<26}  FAILED: {r.failed}")
            continue
        row = f"{r.label:<26}"
        for _, attr in _TABLE_COLUMNS:
            v = getattr(r, attr)
            row += f"{'-':>12}" if v is None else f"{v:>12.4f}"
        ts = "not settled" if r.t_s is None else f"{r.t_s:.4f}"
        row += f"{ts:>14}  {r.trace_path or '-'}"
        lines.append(row)
    return "\n".join(lines) + "\n"


def report_csv_rows(reports: list[RunReport]) -> str:
    """Machine-readable twin of the comparison table, full precision."""
    cols = ["label", "kind", "u_l2", "u_linf", "ey_l2", "ey_linf", "ex_l2", "ex_linf",
            "uc_l2", "uc_linf", "t_s", "failed", "trace"]
    lines = [",".join(cols)]
    for r in reports:
        vals = [r.label, r.kind]
        for attr in ("u_l2", "u_linf", "ey_l2", "ey_linf", "ex_l2", "ex_linf",
                     "uc_l2", "uc_linf"):
            v = getattr(r, attr)
            vals.append("" if v is None or r.failed is not None else f"{v:.12e}")
        vals.append("" if r.t_s is None or r.failed is not None else f"{r.t_s:.12e}")
        vals.append(r.failed or "")
        vals.append(r.trace_path or "")
        lines.append(",".join(vals))
    return "\n".join(lines) + "\n"


def export_trace(tr: Trace, path: Path | str) -> None:
    """Write the trace as CSV: time first, 13 significant digits, LF endings."""
    path = Path(path)
    names = list(tr.columns)
    if "t" in names:
        names.remove("t")
        names.insert(0, "t")
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(names) + "\n")
        if not names:
            return
        data = [tr.columns[name] for name in names]
        for k in range(tr.n_samples):
            fh.write(",".join(f"{col[k]:.12e}" for col in data) + "\n")


def read_trace(path: Path | str) -> Trace:
    """Load a trace CSV written by export_trace; dt comes from the time column."""
    path = Path(path)
    with open(path) as fh:
        header = fh.readline().strip()
        if not header:
            raise ValueError(f"{path} has no header row")
        names = header.split(",")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    if data.size == 0:
        raise ValueError(f"{path} has no samples")
    columns = {name: data[:, j] for j, name in enumerate(names)}
    if "t" in columns and len(columns["t"]) > 1:
        dt = float(columns["t"][1] - columns["t"][0])
    else:
        dt = 1.0
    return Trace(dt=dt, columns=columns)
