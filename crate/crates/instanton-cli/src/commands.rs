//! One pipeline per subcommand; each returns an in-memory [`Outcome`].

use std::collections::BTreeSet;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde_json::json;

use instanton::gl_junction::{self, XGrid};
use instanton::oracle::{self, Drive, Envelope, LevelSystem};
use instanton::potential::{PotentialModel, StationaryPoint};
use instanton::spectra::{self, InstantonData, Pipeline};
use instanton::{wkb, Error};

use crate::config::{Command, RunConfig};
use crate::report::{At, Cell, CliError, Outcome, Series};

const E: &str = "energy";
const ACTION: &str = "action";
const LEN: &str = "length";
const FREQ: &str = "frequency";
const TIME: &str = "time";
const ONE: &str = "dimensionless";

const M_ACTION: &str = "tanh-sinh quadrature of sqrt(2V) between turning points";
const M_TAIL: &str = "asymptotic tail fit of the solved path";
const M_OMEGA: &str = "curvature at the well minimum";
const M_DET: &str = "Gelfand-Yaglom shooting with zero mode removed";
const M_DILUTE: &str = "dilute instanton gas, leading exponential order";
const M_WKB: &str = "WKB quantization tan(theta) = +-2 exp(phi)";
const M_GRID: &str = "finite-difference diagonalization in a box";
const M_BLOCH: &str = "charge-basis diagonalization";
const M_SHOOT: &str = "charge-basis level plus phase-space shooting";
const M_DIAG: &str = "diluteness K exp(-S0/hbar) and Delta E / k_B T";
const M_GL: &str = "Ginzburg-Landau homotopy continuation";
const M_SINC: &str = "linearized junction, sinc-corrected amplitude";
const M_PROP: &str = "adaptive Dormand-Prince propagation";
const M_CLOSED: &str = "closed form";

pub fn run(cfg: &RunConfig) -> Result<Outcome, CliError> {
    match cfg.command {
        Command::DoubleWell => double_well(cfg),
        Command::Washboard => washboard(cfg),
        Command::Charge => charge(cfg),
        Command::Flux => flux(cfg),
        Command::GlCpr => gl_cpr(cfg),
        Command::Wkb => wkb_cmd(cfg),
        Command::Oracle => oracle_cmd(cfg),
        Command::Sweep => sweep(cfg),
    }
}

fn put_instanton(out: &mut Outcome, d: &InstantonData, hbar: f64) -> Result<f64, CliError> {
    let k = d.k(hbar).at("determinants", "k_coefficient")?;
    out.put("S0", d.s0, ACTION, M_ACTION);
    out.put("A", d.a, ONE, M_TAIL);
    out.put("omega", d.omega, FREQ, M_OMEGA);
    out.put("K", k, FREQ, M_DET);
    out.put("hbar", hbar, ACTION, "input or sqrt(2 E_C)");
    Ok(k)
}

fn put_diagnostics(
    out: &mut Outcome,
    k: f64,
    d: &InstantonData,
    hbar: f64,
    pipe: &Pipeline,
    gap: f64,
    temp_k: Option<f64>,
) -> Result<(), CliError> {
    let diag = spectra::diagnostics(k, d.s0, hbar, pipe.fluctuation.horizon, temp_k.map(|_| gap), temp_k)
        .at("spectra", "diagnostics")?;
    out.put("diluteness", diag.diluteness, FREQ, M_DIAG);
    out.put("expected_count", diag.expected_count, ONE, M_DIAG);
    if temp_k.is_some() {
        out.put("thermal_ratio", diag.thermal_ratio, ONE, M_DIAG);
    }
    if diag.dilute_flag {
        out.warnings.push(format!("dilute-gas condition violated: K exp(-S0/hbar) = {:e}", diag.diluteness));
    }
    if temp_k.is_some() && diag.thermal_flag {
        out.warnings.push(format!("thermal ratio {} below {}", diag.thermal_ratio, spectra::THERMAL_LIMIT));
    }
    out.detail("diagnostics", diag);
    Ok(())
}

/// Box half-width wide enough for the low levels of a well centred at ±x_scale.
fn box_half_width(x_scale: f64, hbar: f64, omega: f64, levels: usize) -> f64 {
    x_scale + 12.0 * (hbar * (2 * levels + 1) as f64 / omega).sqrt()
}

fn double_well(cfg: &RunConfig) -> Result<Outcome, CliError> {
    if cfg.get("g").is_some() {
        return poly_bounce(cfg);
    }
    let hbar = cfg.req("hbar");
    let model = PotentialModel::quartic_double_well();
    let mut out = Outcome::default();
    let pipe = spectra::kink_pipeline(&model, -0.5, 0.5).at("trajectory", "kink_pipeline")?;
    let d = pipe.data();
    let k = put_instanton(&mut out, &d, hbar)?;
    let s = spectra::double_well_splitting(&d, hbar).at("spectra", "double_well_splitting")?;
    let de = s.delta_e.unwrap_or(f64::NAN);
    out.put("delta_E_instanton", de, E, M_DILUTE);
    out.put("E_plus", s.e_plus.unwrap_or(f64::NAN), E, M_DILUTE);
    out.put("E_minus", s.e_minus.unwrap_or(f64::NAN), E, M_DILUTE);

    let w = wkb::quantize(&model, hbar, 1).at("wkb", "quantize")?;
    out.warnings.extend(w.warnings.iter().cloned());
    if let Some(dbl) = w.doublets.first() {
        out.put("delta_E_wkb", dbl.parity_split, E, M_WKB);
    }

    let half = box_half_width(0.5, hbar, 1.0, 2).max(2.5);
    let or = oracle::grid_spectrum(&model, (-half, half), cfg.count("points"), hbar, 2)
        .at("oracle", "grid_spectrum")?;
    let de_or = or.energies[1] - or.energies[0];
    out.put("E0_oracle", or.energies[0], E, M_GRID);
    out.put("E1_oracle", or.energies[1], E, M_GRID);
    out.put("delta_E_oracle", de_or, E, M_GRID);
    out.put("ratio_instanton_oracle", de / de_or, ONE, "delta_E_instanton / delta_E_oracle");
    out.detail("oracle_domain", [-half, half]);
    put_diagnostics(&mut out, k, &d, hbar, &pipe, de, cfg.get("temp_k"))?;
    Ok(out)
}

fn poly_bounce(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let hbar = cfg.req("hbar");
    let g = cfg.req("g");
    let n = cfg.get("bigN").unwrap_or(2.0) as u32;
    let model = PotentialModel::poly_bounce(n, g).at("potential_models", "poly_bounce")?;
    let mut out = Outcome::default();
    let pipe = spectra::bounce_pipeline(&model, 0.0).at("trajectory", "bounce_pipeline")?;
    let d = pipe.data();
    let k = put_instanton(&mut out, &d, hbar)?;
    let mult = spectra::bounce_multiplicity(&model);
    let dec = spectra::decay_rate(&d, hbar, mult).at("spectra", "decay_rate")?;
    out.put("im_E0", dec.im_e0, E, M_DILUTE);
    out.put("Gamma", dec.gamma, E, "2 Im E0");
    out.put("lifetime", dec.lifetime, TIME, "hbar / Im E0");
    out.put("escape_directions", mult as f64, ONE, "symmetry of the well");
    let closed = hbar
        * spectra::poly_bounce_im_energy(n, g * hbar.powi(n as i32 - 1)).at("spectra", "poly_bounce_im_energy")?;
    out.put("im_E0_closed_form", closed, E, M_CLOSED);
    out.put("ratio_numeric_closed_form", dec.im_e0 / closed, ONE, "im_E0 / im_E0_closed_form");
    let sigma = model.exit_point(0.0).at("potential_models", "exit_point")?.sigma;
    out.put("sigma", sigma, LEN, "turning point of the inverted potential");
    put_diagnostics(&mut out, k, &d, hbar, &pipe, hbar * d.omega, cfg.get("temp_k"))?;
    out.series.push(Series::numeric("survival", &["t", "P"], dec.survival.iter().map(|&(t, p)| vec![t, p]).collect()));
    Ok(out)
}

fn washboard(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let (ej, ec) = (cfg.req("ej"), cfg.req("ec"));
    let mut model =
        PotentialModel::washboard(ej, ec, cfg.req("ie"), cfg.req("ic")).at("potential_models", "washboard")?;
    let mut out = Outcome::default();
    if cfg.with_gl_correction {
        let l = cfg.req("l_over_zeta");
        let grid = gl_junction::delta_grid(cfg.count("delta_points"));
        let xg = XGrid { points_per_zeta: cfg.count("points_per_zeta"), ..XGrid::default() };
        let cpr = gl_junction::nonlinear_cpr(l, &grid, cfg.count("homotopy_steps"), xg)
            .at("gl_junction", "nonlinear_cpr")?;
        let corr = gl_junction::washboard_correction(&cpr, ej).at("gl_junction", "washboard_correction")?;
        out.put("J_c", cpr.j_c, "current", M_GL);
        out.series.push(Series::numeric(
            "gl_correction",
            &["delta", "J", "deviation", "eps"],
            (0..grid.len()).map(|i| vec![grid[i], cpr.j[i], cpr.deviation[i], corr.eps[i]]).collect(),
        ));
        model = model.with_correction(corr.spline());
    }
    let rep = spectra::washboard_analysis(&model, cfg.get("hbar")).at("spectra", "washboard_analysis")?;
    let emit = |r: &spectra::WashboardResult, suffix: &str, out: &mut Outcome| {
        let key = |k: &str| format!("{k}{suffix}");
        out.put(&key("S0"), r.s0, ACTION, M_ACTION);
        out.put(&key("A"), r.a, ONE, M_TAIL);
        out.put(&key("omega"), r.omega, FREQ, M_OMEGA);
        out.put(&key("K"), r.spectrum.k, FREQ, M_DET);
        out.put(&key("well"), r.well, LEN, "metastable minimum nearest the origin");
        out.put(&key("sigma"), r.sigma, LEN, "exit point");
        out.put(&key("barrier"), r.barrier, LEN, "barrier top");
        out.put(&key("Gamma"), r.spectrum.gamma.unwrap_or(f64::NAN), E, "2 Im E0");
        out.put(&key("im_E0"), r.spectrum.im_e0.unwrap_or(f64::NAN), E, M_DILUTE);
        out.put(&key("lifetime"), r.spectrum.lifetime.unwrap_or(f64::NAN), TIME, "hbar / Im E0");
        out.series.push(Series::numeric(
            &format!("survival{suffix}"),
            &["t", "P"],
            r.survival.iter().map(|&(t, p)| vec![t, p]).collect(),
        ));
    };
    let base = &rep.without_correction;
    emit(base, "", &mut out);
    if let Some(c) = &rep.with_correction {
        emit(c, "_corrected", &mut out);
    }
    let hbar = base.spectrum.hbar;
    out.put("hbar", hbar, ACTION, "input or sqrt(2 E_C)");
    let diag = spectra::diagnostics(
        base.spectrum.k,
        base.s0,
        hbar,
        0.0,
        cfg.get("temp_k").map(|_| hbar * base.omega),
        cfg.get("temp_k"),
    )
    .at("spectra", "diagnostics")?;
    out.put("diluteness", diag.diluteness, FREQ, M_DIAG);
    if cfg.get("temp_k").is_some() {
        out.put("thermal_ratio", diag.thermal_ratio, ONE, "hbar omega / k_B T");
    }
    out.detail("diagnostics", diag);
    Ok(out)
}

fn charge(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let (ej, ec) = (cfg.req("ej"), cfg.req("ec"));
    let model = PotentialModel::periodic_cosine(ej, ec).at("potential_models", "periodic_cosine")?;
    let hbar = (2.0 * ec).sqrt();
    let mut out = Outcome::default();
    let pipe = spectra::kink_pipeline(&model, 0.0, 2.0 * PI).at("trajectory", "kink_pipeline")?;
    let d = pipe.data();
    let k = put_instanton(&mut out, &d, hbar)?;
    let n = cfg.count("theta_points");
    let thetas: Vec<f64> = (0..n).map(|i| -PI + 2.0 * PI * i as f64 / (n - 1) as f64).collect();
    let band = spectra::bloch_band(&d, hbar, &thetas).at("spectra", "bloch_band")?;
    let cutoff = cfg
        .get("cutoff")
        .map(|c| c as usize)
        .unwrap_or_else(|| oracle::DEFAULT_CHARGE_CUTOFF.max(oracle::minimum_cutoff(ec, ej)));
    let obands = oracle::ground_band(ec, ej, cutoff, &thetas).at("oracle", "ground_band")?;
    let bw_or = oracle::mathieu_bandwidth(ec, ej, cutoff).at("oracle", "mathieu_bandwidth")?;
    let direct = oracle::bloch_spectrum(ec, ej, PI, cutoff, 1).at("oracle", "bloch_spectrum")?.energies[0]
        - oracle::bloch_spectrum(ec, ej, 0.0, cutoff, 1).at("oracle", "bloch_spectrum")?.energies[0];
    let bw = band.bandwidth.unwrap_or(f64::NAN);
    out.put("bandwidth_instanton", bw, E, M_DILUTE);
    out.put("bandwidth_oracle", bw_or, E, M_SHOOT);
    out.put("bandwidth_oracle_direct", direct, E, M_BLOCH);
    out.put("ratio_instanton_oracle", bw / bw_or, ONE, "bandwidth_instanton / bandwidth_oracle");
    out.detail("charge_cutoff", cutoff);
    put_diagnostics(&mut out, k, &d, hbar, &pipe, hbar * d.omega, cfg.get("temp_k"))?;
    out.series.push(Series::numeric(
        "band",
        &["theta", "E_instanton", "E_oracle"],
        band.band.iter().zip(&obands).map(|(&(t, e), &(_, eo))| vec![t, e, eo + ej]).collect(),
    ));
    Ok(out)
}

fn degenerate_pair(model: &PotentialModel, center: f64, scale: f64) -> Result<(f64, f64), CliError> {
    let mut mins: Vec<StationaryPoint> =
        model.minima(center - 2.0 * PI, center + 2.0 * PI).at("potential_models", "minima")?;
    mins.sort_by(|a, b| model.evaluate(a.x).v.total_cmp(&model.evaluate(b.x).v));
    if mins.len() < 2 {
        return Err(CliError::Solver {
            module: "potential_models",
            operation: "minima",
            source: Error::Semantics("fewer than two minima: the potential is not a double well".into()),
        });
    }
    let (v0, v1) = (model.evaluate(mins[0].x).v, model.evaluate(mins[1].x).v);
    if (v1 - v0).abs() > 1e-9 * scale {
        return Err(CliError::Solver {
            module: "potential_models",
            operation: "minima",
            source: Error::Semantics(format!("lowest minima differ by {:e}; tunnel splitting needs degeneracy", v1 - v0)),
        });
    }
    Ok((mins[0].x.min(mins[1].x), mins[0].x.max(mins[1].x)))
}

fn flux(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let (ej, ec, el, phi_e) = (cfg.req("ej"), cfg.req("ec"), cfg.req("el"), cfg.req("phi_e"));
    let model = PotentialModel::flux(ej, ec, el, phi_e).at("potential_models", "flux")?;
    let hbar = (2.0 * ec).sqrt();
    let (x0, x1) = degenerate_pair(&model, phi_e, ej.max(el))?;
    let mut out = Outcome::default();
    let pipe = spectra::kink_pipeline(&model, x0, x1).at("trajectory", "kink_pipeline")?;
    let d = pipe.data();
    let k = put_instanton(&mut out, &d, hbar)?;
    let s = spectra::double_well_splitting(&d, hbar).at("spectra", "double_well_splitting")?;
    let de = s.delta_e.unwrap_or(f64::NAN);
    out.put("E_plus", s.e_plus.unwrap_or(f64::NAN), E, M_DILUTE);
    out.put("E_minus", s.e_minus.unwrap_or(f64::NAN), E, M_DILUTE);
    out.put("delta_E_instanton", de, E, M_DILUTE);
    out.put(
        "E_ground_printed",
        spectra::flux_ground_energy_omega(&d, hbar).at("spectra", "flux_ground_energy_omega")?,
        E,
        "hbar omega/2 + hbar K exp(-S0/hbar)",
    );
    out.put("minimum_left", x0, LEN, "stationary-point search");
    out.put("minimum_right", x1, LEN, "stationary-point search");
    let pad = box_half_width(0.0, hbar, d.omega, 2);
    let or = oracle::grid_spectrum(&model, (x0 - pad, x1 + pad), cfg.count("points"), hbar, 2)
        .at("oracle", "grid_spectrum")?;
    out.put("E0_oracle", or.energies[0], E, M_GRID);
    out.put("E1_oracle", or.energies[1], E, M_GRID);
    out.put("delta_E_oracle", or.energies[1] - or.energies[0], E, M_GRID);
    put_diagnostics(&mut out, k, &d, hbar, &pipe, de, cfg.get("temp_k"))?;
    Ok(out)
}

fn gl_cpr(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let l = cfg.req("l_over_zeta");
    let grid = gl_junction::delta_grid(cfg.count("delta_points"));
    let xg = XGrid { points_per_zeta: cfg.count("points_per_zeta"), ..XGrid::default() };
    let cpr =
        gl_junction::nonlinear_cpr(l, &grid, cfg.count("homotopy_steps"), xg).at("gl_junction", "nonlinear_cpr")?;
    let lin = gl_junction::linear_cpr(l, &grid).at("gl_junction", "linear_cpr")?;
    let mut out = Outcome::default();
    let maxabs = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    out.put("J_c", cpr.j_c, "current", M_GL);
    out.put("J_c_sinc", lin.j_c, "current", M_SINC);
    out.put("max_deviation", maxabs(&cpr.deviation), ONE, M_GL);
    let fold = |f: fn(&gl_junction::Profile) -> f64| cpr.profiles.iter().map(f).fold(0.0f64, f64::max);
    out.put("max_residual", fold(|p| p.residual), ONE, M_GL);
    out.put("max_current_spread", fold(|p| p.current_spread), ONE, M_GL);
    out.put("max_boundary_error", fold(|p| p.boundary_error), ONE, M_GL);
    out.detail("x_intervals", xg.intervals(l));
    out.series.push(Series::numeric(
        "cpr",
        &["delta", "J", "deviation", "J_sinc"],
        (0..grid.len()).map(|i| vec![grid[i], cpr.j[i], cpr.deviation[i], lin.j[i]]).collect(),
    ));
    Ok(out)
}

/// Quartic double well, or the parabolic double well when `a` is set.
fn bound_model(cfg: &RunConfig) -> Result<(PotentialModel, f64, f64), CliError> {
    let omega = cfg.req("omega");
    match cfg.get("a") {
        Some(a) => Ok((
            PotentialModel::parabolic_double_well(omega, a).at("potential_models", "parabolic_double_well")?,
            a,
            omega,
        )),
        None if omega == 1.0 => Ok((PotentialModel::quartic_double_well(), 0.5, 1.0)),
        None => Err(CliError::validation("'omega' applies to the parabolic well; set 'a' as well")),
    }
}

fn wkb_cmd(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let hbar = cfg.req("hbar");
    let (model, x_scale, omega) = bound_model(cfg)?;
    let n_max = cfg.count("n_max");
    let spec = wkb::quantize(&model, hbar, n_max as u32).at("wkb", "quantize")?;
    let mut out = Outcome { warnings: spec.warnings.clone(), ..Default::default() };
    if spec.doublets.is_empty() {
        return Err(CliError::Solver {
            module: "wkb",
            operation: "quantize",
            source: Error::Domain("no doublet below the barrier".into()),
        });
    }
    let levels = 2 * spec.doublets.len();
    let half = box_half_width(x_scale, hbar, omega, levels);
    let or = oracle::grid_spectrum(&model, (-half, half), cfg.count("points"), hbar, levels)
        .at("oracle", "grid_spectrum")?;
    let d0 = &spec.doublets[0];
    out.put("delta_E_wkb", d0.parity_split, E, M_WKB);
    out.put("delta_E_oracle", or.energies[1] - or.energies[0], E, M_GRID);
    out.put("phi", d0.phi, ONE, "barrier phase integral at E_plus");
    out.put("theta", d0.theta, ONE, "well phase integral at E_plus");
    out.put("max_residual", spec.doublets.iter().map(|d| d.residual).fold(0.0, f64::max), ONE, M_WKB);
    out.detail("doublets", &spec.doublets);
    out.series.push(Series::numeric(
        "wkb",
        &["n", "E_plus", "E_minus", "splitting", "approx_E_plus", "approx_E_minus", "residual", "oracle_E_plus", "oracle_E_minus"],
        spec.doublets
            .iter()
            .enumerate()
            .map(|(i, d)| {
                vec![
                    d.n as f64,
                    d.e_plus,
                    d.e_minus,
                    d.parity_split,
                    d.approx_e_plus,
                    d.approx_e_minus,
                    d.residual,
                    or.energies[2 * i],
                    or.energies[2 * i + 1],
                ]
            })
            .collect(),
    ));
    Ok(out)
}

fn oracle_cmd(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let hbar = cfg.req("hbar");
    let (model, x_scale, omega) = bound_model(cfg)?;
    let levels = cfg.count("levels");
    let half = box_half_width(x_scale, hbar, omega, levels);
    let spec = oracle::grid_spectrum(&model, (-half, half), cfg.count("points"), hbar, levels)
        .at("oracle", "grid_spectrum")?;
    let mut out = Outcome::default();
    for (i, e) in spec.energies.iter().enumerate() {
        out.put(&format!("E{i}"), *e, E, M_GRID);
    }
    out.put("delta_E", spec.energies[1] - spec.energies[0], E, M_GRID);
    out.detail("domain", [-half, half]);
    out.series.push(Series::numeric(
        "spectrum",
        &["level", "E"],
        spec.energies.iter().enumerate().map(|(i, &e)| vec![i as f64, e]).collect(),
    ));
    let amp = cfg.req("drive");
    if amp != 0.0 {
        let sys = LevelSystem::from_spectrum(&spec, levels).at("oracle", "from_spectrum")?;
        let wd = (spec.energies[1] - spec.energies[0]) / hbar;
        let x01 = sys.coupling[0][1].abs();
        let rabi = 2.0 * PI * hbar / (amp.abs() * x01);
        let t1 = cfg.get("duration").unwrap_or(2.0 * rabi);
        let drive = Drive { amplitude: amp, envelope: Envelope::Constant, omega_d: wd, phase: 0.0 };
        let mut c0 = vec![(0.0, 0.0); levels];
        c0[0] = (1.0, 0.0);
        let pops = oracle::propagate_populations(&sys, &drive, (0.0, t1), &c0, cfg.count("samples"))
            .at("oracle", "propagate_populations")?;
        out.put("rabi_period_rwa", rabi, TIME, "2 pi hbar / (drive |x01|)");
        out.put("x01", x01, LEN, M_GRID);
        out.put("max_norm_error", pops.max_norm_error, ONE, M_PROP);
        out.put("steps", pops.steps as f64, ONE, M_PROP);
        let last = pops.populations.last().cloned().unwrap_or_default();
        out.put("P0_final", last[0], ONE, M_PROP);
        out.put("P1_final", last[1], ONE, M_PROP);
        let mut cols = vec!["t".to_string()];
        cols.extend((0..levels).map(|i| format!("P{i}")));
        out.series.push(Series {
            name: "populations".into(),
            columns: cols,
            rows: pops
                .times
                .iter()
                .zip(&pops.populations)
                .map(|(t, p)| std::iter::once(*t).chain(p.iter().copied()).map(Cell::Num).collect())
                .collect(),
        });
    }
    Ok(out)
}

fn sweep(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let sw = cfg.sweep.as_ref().expect("sweep command carries a sweep spec");
    let values = sw.values();
    let points: Vec<Result<Outcome, CliError>> = values.par_iter().map(|&v| run(&cfg.at_point(v))).collect();
    let keys: BTreeSet<String> =
        points.iter().filter_map(|r| r.as_ref().ok()).flat_map(|o| o.results.keys().cloned()).collect();
    let mut columns = vec![sw.parameter.clone()];
    columns.extend(keys.iter().cloned());
    columns.push("error".into());
    let mut out = Outcome::default();
    let mut rows = Vec::with_capacity(values.len());
    let mut docs = Vec::with_capacity(values.len());
    for (v, r) in values.iter().zip(&points) {
        let mut row = vec![Cell::Num(*v)];
        match r {
            Ok(o) => {
                row.extend(keys.iter().map(|k| o.results.get(k).map_or(Cell::Empty, |q| Cell::Num(q.value))));
                row.push(Cell::Empty);
                docs.push(json!({ "value": v, "results": o.results, "warnings": o.warnings }));
            }
            Err(e) => {
                row.extend(keys.iter().map(|_| Cell::Empty));
                row.push(Cell::Text(e.to_string()));
                out.warnings.push(format!("{} = {v}: {e}", sw.parameter));
                docs.push(json!({ "value": v, "error": e.report()["error"] }));
            }
        }
        rows.push(row);
    }
    out.put("points", values.len() as f64, ONE, "sweep size");
    out.put("failed_points", points.iter().filter(|r| r.is_err()).count() as f64, ONE, "sweep size");
    out.detail("points", docs);
    out.series.push(Series { name: "sweep".into(), columns, rows });
    Ok(out)
}
