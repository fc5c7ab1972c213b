"""Experiment runners: error-magnitude CDFs, SNR and sum-SE sweeps.

Drops are the unit of parallelism. Every drop derives its own random
substreams from (seed, purpose, scenario index, drop index), workers
never share generator state, and per-scenario results are merged in
drop order, so output files are byte-identical for any thread count.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import analytics, channel, neumann
from .channel import ArrayGeometry, UEGeometry, substream
from .config import SimulationConfig, default_config, load_config  # noqa: F401 (re-export)
from .linalg import SingularMatrix, gram, hermitian_inverse
from .precoding import MAX_SINGULAR_FRACTION, TooManySingular

LOG10_FACTOR = 10.0 / math.log(10.0)


@dataclass
class ResultTable:
    """Ordered named columns plus run metadata, written as CSV."""
    columns: list = field(default_factory=list)  # (name, 1-D array or str list)
    metadata: dict = field(default_factory=dict)

    def column(self, name):
        for col_name, values in self.columns:
            if col_name == name:
                return values
        raise KeyError(name)

    @property
    def column_names(self):
        return [name for name, _ in self.columns]


def _format_cell(value):
    if isinstance(value, str):
        return value
    return "%.17g" % float(value)


def write_results(table, path):
    """CSV with one metadata comment line, a header row, then data rows.

    Numbers carry 17 significant digits so a reader recovers the exact
    binary doubles.
    """
    n_rows = max((len(values) for _, values in table.columns), default=0)
    lines = ["# " + "; ".join(f"{k}={v}" for k, v in table.metadata.items())]
    lines.append(",".join(name for name, _ in table.columns))
    for i in range(n_rows):
        cells = []
        for _, values in table.columns:
            cells.append(_format_cell(values[i]) if i < len(values) else "nan")
        lines.append(",".join(cells))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def read_results(path):
    """Inverse of :func:`write_results` (round-trip checked in tests)."""
    with open(path, encoding="utf-8") as fh:
        lines = [line.rstrip("\n") for line in fh]
    if not lines or not lines[0].startswith("#"):
        raise ValueError(f"{path}: missing metadata comment line")
    metadata = {}
    for item in lines[0][1:].split(";"):
        if "=" in item:
            key, _, value = item.partition("=")
            metadata[key.strip()] = value.strip()
    header = lines[1].split(",")
    rows = [line.split(",") for line in lines[2:] if line]
    columns = []
    for j, name in enumerate(header):
        cells = [row[j] for row in rows]
        try:
            columns.append((name, np.array([float(c) for c in cells])))
        except ValueError:
            columns.append((name, cells))
    return ResultTable(columns=columns, metadata=metadata)


def upa_shape_for(n_antennas):
    """Split an antenna count into (columns, rows), x-count <= z-count.

    Uses the most balanced divisor pair; 128 maps to 8 columns by 16
    rows, matching the default array.
    """
    best = None
    for m_x in range(1, int(math.isqrt(n_antennas)) + 1):
        if n_antennas % m_x == 0:
            best = (m_x, n_antennas // m_x)
    return best


def _chain_ues(cfg, az_sep=0.0, el_sep=0.0):
    """Reference-plus-offset user line; swept dimension given by nonzero sep."""
    if cfg.ue_az_list:
        return tuple(UEGeometry(az, el, cfg.asd_az, cfg.asd_el)
                     for az, el in zip(cfg.ue_az_list, cfg.ue_el_list))
    return tuple(UEGeometry(cfg.ref_az + k * az_sep, cfg.ref_el + k * el_sep,
                            cfg.asd_az, cfg.asd_el)
                 for k in range(cfg.n_ues))


def _scenario_list(cfg, include_elevation):
    scenarios = [(f"az{s:g}", s, 0.0) for s in cfg.az_separations]
    if include_elevation:
        scenarios += [(f"el{s:g}", 0.0, s) for s in cfg.el_separations]
    return scenarios


def _drop_betas(cfg, scenario_idx, drop_idx):
    """Per-user large-scale gains for one drop (all ones in unit mode)."""
    if cfg.beta_mode == "unit":
        return np.ones(cfg.n_ues)
    rng = substream(cfg.seed, "shadow", scenario_idx, drop_idx)
    radii = cfg.cell_radius_m * np.sqrt(rng.uniform(size=cfg.n_ues))
    radii = np.maximum(radii, channel.REF_DISTANCE_M)
    return np.array([channel.link_gain(r, rng, shadow_enabled=True) for r in radii])


def _run_drops(n_drops, worker, threads):
    """Evaluate worker(drop_idx) for all drops, results in drop order."""
    if threads <= 1:
        return [worker(d) for d in range(n_drops)]
    results = [None] * n_drops
    with ThreadPoolExecutor(max_workers=threads) as pool:
        for idx, value in pool.map(lambda d: (d, worker(d)), range(n_drops)):
            results[idx] = value
    return results


@dataclass
class ScenarioStats:
    snr1_samples: np.ndarray      # (n_samples, n_ues) per-user SNR at p/sigma2 = 1
    analytic_snr1: np.ndarray     # (n_drops, n_ues) closed-form SNR at p/sigma2 = 1
    n_singular: int


def _simulate_scenario(cfg, ues, scenario_idx, threads):
    """Trace-inverse sampling plus per-drop closed-form SNR for one scenario.

    The post-precoding SNR is exactly linear in transmit power, so one
    set of unit-power samples serves every operating point.
    """
    geom = cfg.array_geometry()
    m = geom.n_antennas
    delta = channel.compute_mean_gram(cfg.n_ues, m)

    def worker(drop_idx):
        drop = channel.draw_drop(ues, cfg.n_paths,
                                 substream(cfg.seed, "drop", scenario_idx, drop_idx))
        steering = channel.steering_matrix(drop, geom)
        covs = [channel.compute_covariance(drop, geom, l, steering)
                for l in range(cfg.n_ues)]
        betas = _drop_betas(cfg, scenario_idx, drop_idx)
        moments = analytics.compute_D(delta, covs)
        ana = analytics.expected_snr_approx(delta, moments, betas, 1.0, 1.0, m)
        rng = substream(cfg.seed, "gains", scenario_idx, drop_idx)
        samples = np.empty((cfg.n_realizations_per_drop, cfg.n_ues))
        n_used = 0
        n_singular = 0
        for _ in range(cfg.n_realizations_per_drop):
            h = channel.draw_channel(drop, geom, rng, steering=steering)
            try:
                trace_inv = float(np.trace(hermitian_inverse(gram(h))).real)
            except SingularMatrix:
                n_singular += 1
                continue
            samples[n_used] = betas * cfg.n_ues / trace_inv
            n_used += 1
        return samples[:n_used], ana, n_singular

    results = _run_drops(cfg.n_drops, worker, threads)
    n_singular = sum(r[2] for r in results)
    total = cfg.n_drops * cfg.n_realizations_per_drop
    if n_singular > MAX_SINGULAR_FRACTION * total:
        raise TooManySingular(f"{n_singular}/{total} realizations singular "
                              f"in scenario index {scenario_idx}")
    return ScenarioStats(
        snr1_samples=np.concatenate([r[0] for r in results], axis=0),
        analytic_snr1=np.stack([r[1] for r in results]),
        n_singular=n_singular,
    )


def _base_metadata(cfg, experiment):
    return {
        "experiment": experiment,
        "seed": cfg.seed,
        "config_sha256": cfg.content_hash(),
        "n_drops": cfg.n_drops,
        "n_realizations_per_drop": cfg.n_realizations_per_drop,
        "placement": "swept-dimension chain" if not cfg.ue_az_list else "explicit",
        "beta_mode": cfg.beta_mode,
    }


def run_snr_sweep(cfg, threads=1, progress=None):
    """Expected per-user ZF SNR vs operating power, simulated and closed form.

    One column triple per scenario: simulated mean (dB), its standard
    error (dB), and the closed-form value (dB), at each operating SNR.
    """
    scenarios = _scenario_list(cfg, include_elevation=True)
    p_values = np.array([10.0 ** (s / 10.0) for s in cfg.operating_snr_db])
    columns = [("op_snr_db", np.asarray(cfg.operating_snr_db, float))]
    meta = _base_metadata(cfg, "snr-sweep")
    meta["snr_definition"] = "10*log10(mean linear per-user SNR)"
    for idx, (label, az_sep, el_sep) in enumerate(scenarios):
        stats = _simulate_scenario(cfg, _chain_ues(cfg, az_sep, el_sep), idx, threads)
        per_sample = stats.snr1_samples.mean(axis=1)  # user-average per realization
        mean1 = float(per_sample.mean())
        se1 = float(per_sample.std(ddof=1) / math.sqrt(per_sample.size))
        ana1 = float(stats.analytic_snr1.mean())
        columns.append((f"{label}_sim_snr_db", 10.0 * np.log10(p_values * mean1)))
        columns.append((f"{label}_sim_snr_stderr_db",
                        np.full(p_values.size, LOG10_FACTOR * se1 / mean1)))
        columns.append((f"{label}_analytic_snr_db", 10.0 * np.log10(p_values * ana1)))
        meta[f"n_singular_{label}"] = stats.n_singular
        if progress:
            progress(f"scenario {label}: sim {10*np.log10(mean1):+.3f} dB, "
                     f"analytic {10*np.log10(ana1):+.3f} dB at 0 dB operating SNR")
    return ResultTable(columns=columns, metadata=meta)


def run_se_sweep(cfg, threads=1, progress=None):
    """Ergodic sum spectral efficiency vs operating power (azimuth scenarios)."""
    scenarios = _scenario_list(cfg, include_elevation=False)
    p_values = np.array([10.0 ** (s / 10.0) for s in cfg.operating_snr_db])
    columns = [("op_snr_db", np.asarray(cfg.operating_snr_db, float))]
    meta = _base_metadata(cfg, "se-sweep")
    meta["se_definition"] = "mean over realizations of sum_l log2(1+SNR_l), bits/s/Hz"
    for idx, (label, az_sep, el_sep) in enumerate(scenarios):
        stats = _simulate_scenario(cfg, _chain_ues(cfg, az_sep, el_sep), idx, threads)
        sim = np.empty(p_values.size)
        stderr = np.empty(p_values.size)
        ana = np.empty(p_values.size)
        for i, p in enumerate(p_values):
            per_sample = np.log2(1.0 + p * stats.snr1_samples).sum(axis=1)
            sim[i] = per_sample.mean()
            stderr[i] = per_sample.std(ddof=1) / math.sqrt(per_sample.size)
            ana[i] = np.log2(1.0 + p * stats.analytic_snr1).sum(axis=1).mean()
        columns.append((f"{label}_sim_se", sim))
        columns.append((f"{label}_sim_se_stderr", stderr))
        columns.append((f"{label}_analytic_se", ana))
        meta[f"n_singular_{label}"] = stats.n_singular
        if progress:
            progress(f"scenario {label}: sum SE {sim[-1]:.2f} bits/s/Hz at "
                     f"{cfg.operating_snr_db[-1]:g} dB (sim)")
    return ResultTable(columns=columns, metadata=meta)


def run_ns_accuracy(cfg, threads=1, progress=None):
    """CDFs of the series-inverse error magnitude across antenna counts.

    For each antenna count the column holds the sorted error-magnitude
    samples (plus a parallel relative-Frobenius column); cdf_prob gives
    the empirical probability axis. Non-evaluable and singular samples
    are dropped and counted in the metadata.
    """
    n_samples = cfg.n_drops * cfg.n_realizations_per_drop
    columns = [("cdf_prob", (np.arange(n_samples) + 1.0) / n_samples)]
    meta = _base_metadata(cfg, "ns-accuracy")
    meta["series_order"] = cfg.neumann_order
    meta["alpha_metric"] = "right_division trace(I - exact_inv @ inv(approx))"
    meta["frobenius_metric"] = "norm(approx - exact_inv)/norm(exact_inv)"
    ues = _chain_ues(cfg, az_sep=cfg.az_separations[0], el_sep=0.0)

    for mi, m in enumerate(cfg.ns_m_values):
        m_x, m_z = upa_shape_for(m)
        geom = ArrayGeometry("upa", m_x, m_z, cfg.d_x, cfg.d_z)
        delta = channel.compute_mean_gram(cfg.n_ues, m)

        def worker(drop_idx, geom=geom, delta=delta, mi=mi):
            drop = channel.draw_drop(ues, cfg.n_paths,
                                     substream(cfg.seed, "drop", mi, drop_idx))
            steering = channel.steering_matrix(drop, geom)
            rng = substream(cfg.seed, "gains", mi, drop_idx)
            alphas, frobs = [], []
            n_singular = 0
            n_not_evaluable = 0
            for _ in range(cfg.n_realizations_per_drop):
                h = channel.draw_channel(drop, geom, rng, steering=steering)
                try:
                    exact_inv = hermitian_inverse(gram(h))
                except SingularMatrix:
                    n_singular += 1
                    continue
                approx = neumann.neumann_inverse(h, delta, cfg.neumann_order)
                frobs.append(neumann.frobenius_error(exact_inv, approx))
                try:
                    alphas.append(neumann.error_magnitude(exact_inv, approx))
                except neumann.NotEvaluable:
                    n_not_evaluable += 1
            return alphas, frobs, n_singular, n_not_evaluable

        results = _run_drops(cfg.n_drops, worker, threads)
        alphas = np.sort(np.concatenate([np.asarray(r[0]) for r in results]))
        frobs = np.sort(np.concatenate([np.asarray(r[1]) for r in results]))
        columns.append((f"alpha_m{m}", alphas))
        columns.append((f"frob_m{m}", frobs))
        meta[f"n_singular_m{m}"] = sum(r[2] for r in results)
        meta[f"n_not_evaluable_m{m}"] = sum(r[3] for r in results)
        if progress:
            progress(f"M={m} ({m_x}x{m_z}): median|alpha|={np.median(np.abs(alphas)):.4g}, "
                     f"median frob={np.median(frobs):.4g}")
    return ResultTable(columns=columns, metadata=meta)


def run_oracle(cfg, threads=1, progress=None):
    """Monte-Carlo moment-identity diagnostics for one small-instance drop."""
    geom = cfg.array_geometry()
    ues = _chain_ues(cfg, az_sep=cfg.az_separations[0], el_sep=0.0)
    drop = channel.draw_drop(ues, cfg.n_paths, substream(cfg.seed, "drop", 0, 0))
    n_total = cfg.n_drops * cfg.n_realizations_per_drop
    report = analytics.moment_oracle(drop, geom, n_total,
                                     substream(cfg.seed, "oracle", 0))
    rows = [
        ("quad_moment_max_entry", report.quad_max_dev_sigmas, 0.0, 1.0,
         report.quad_max_dev_sigmas),
        ("fourth_moment", report.fourth_moment.estimate, report.fourth_moment.analytic,
         report.fourth_moment.sigma, report.fourth_moment.deviation_sigmas),
        ("first_order_cancellation", report.cancellation.estimate, 0.0,
         report.cancellation.sigma, report.cancellation.deviation_sigmas),
        ("mean_gram_max_entry", report.mean_gram_max_dev, 0.0,
         report.mean_gram_max_dev / report.mean_gram_max_dev_sigmas
         if report.mean_gram_max_dev_sigmas else 0.0,
         report.mean_gram_max_dev_sigmas),
        ("laplace_relative_gap", report.laplace_gap, 0.0, float("nan"), float("nan")),
    ]
    meta = _base_metadata(cfg, "oracle")
    meta["note"] = "laplace_relative_gap is reported, not asserted"
    columns = [
        ("check", [r[0] for r in rows]),
        ("estimate", np.array([r[1] for r in rows])),
        ("analytic", np.array([r[2] for r in rows])),
        ("sigma", np.array([r[3] for r in rows])),
        ("deviation_sigmas", np.array([r[4] for r in rows])),
    ]
    if progress:
        for r in rows:
            progress(f"{r[0]}: estimate={r[1]:.6g} analytic={r[2]:.6g} dev={r[4]:.3g} sigma")
    return ResultTable(columns=columns, metadata=meta)


RUNNERS = {
    "ns-accuracy": run_ns_accuracy,
    "snr-sweep": run_snr_sweep,
    "se-sweep": run_se_sweep,
    "oracle": run_oracle,
}
