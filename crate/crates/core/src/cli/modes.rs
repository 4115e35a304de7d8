use std::fs;
use std::path::Path;

use crate::envelope::{
    build_h, build_h1, build_q, closed_form, decay_law_label, feedback_label, k_constant, ode_label, run_example,
    solve_envelope, ExampleId, ExampleSettings,
};
use crate::feedback::{build_h0_with, order_at_infinity, GrowthClass, H0Options, MonotoneFn};
use crate::raytrace::{
    flow, gcc_entry_time, geodesic_residual, make_null, normalized_symbol, sample_bundle, BoxDomain, Matrix,
    MediumFields,
};
use crate::wavesim::{energy_identity_residual, fit_decay, fit_series, observability_quotient, run_full, DecayModel};

use super::config::{ExperimentConfig, H0Config, MediumConfig, Mode};
use super::plot::{emit_plot, Axes};
use super::report::{fmt_f64, write_csv, write_file, Report};
use super::{verify, CliError};

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io { path: path.to_path_buf(), message: e.to_string() }
}

/// Runs `mode` with a validated config, writing artifacts and `report.csv` into
/// `out_dir`.
pub fn run_mode(mode: Mode, cfg: &ExperimentConfig, out_dir: &Path) -> Result<Report, CliError> {
    cfg.validate(mode)?;
    fs::create_dir_all(out_dir).map_err(|e| io_err(out_dir, e))?;
    let report = match mode {
        Mode::Envelope => envelope(cfg, out_dir)?,
        Mode::Simulate => simulate(cfg, out_dir)?,
        Mode::Raytrace => raytrace(cfg, out_dir)?,
        Mode::Verify => verify::run(cfg, out_dir)?,
        Mode::Reproduce => reproduce(cfg, out_dir)?,
    };
    write_file(&out_dir.join("report.csv"), &report.to_csv())?;
    Ok(report)
}

fn plot(cfg: &ExperimentConfig, dir: &Path, name: &str, axes: Axes) -> Result<(), CliError> {
    if cfg.output.plots {
        emit_plot(&dir.join(format!("{name}.csv")), &dir.join(format!("{name}.svg")), axes)?;
    }
    Ok(())
}

fn example_settings(cfg: &ExperimentConfig, k: Option<f64>) -> ExampleSettings {
    let mut st = ExampleSettings::default();
    if let Some(env) = &cfg.envelope {
        st.e0 = env.e0;
        st.t0 = env.t0;
        st.gamma = env.gamma;
        st.meas_qt = env.meas_qt;
        st.p0 = env.p0;
        st.tau_max = env.t_max;
        st.dt = env.dt;
        if let Some(k) = k.or(env.k) {
            st.k = k;
        }
    }
    st
}

fn envelope(cfg: &ExperimentConfig, dir: &Path) -> Result<Report, CliError> {
    let env = cfg.envelope.as_ref().expect("validated");
    let spec = cfg.feedback_spec()?;
    let h0 = match (env.h0, &spec) {
        (Some(H0Config::Linear { slope }), _) => MonotoneFn::linear(slope),
        (Some(H0Config::Power { coeff, exponent }), _) => MonotoneFn::power(coeff, exponent),
        (None, Some(spec)) => {
            let delta = cfg.feedback.and_then(|f| f.delta).unwrap_or(1.0);
            build_h0_with(spec, &H0Options { delta, ..H0Options::default() })?
        }
        (None, None) => unreachable!("validated"),
    };
    let r = spec.as_ref().map(order_at_infinity).or(env.r).unwrap_or(1.0);
    let k = match env.k {
        Some(k) => k,
        None => k_constant(GrowthClass::from_order(r), env.c_obs.expect("validated"), env.d0, r, env.p0)?,
    };
    let h = build_h(&h0, &build_h1(r, env.p0)?, env.meas_qt)?;
    let q = build_q(&h, k)?;
    let curve = solve_envelope(&q, env.e0, env.t_max, env.dt)?;
    let rows: Vec<Vec<f64>> = curve.t.iter().zip(&curve.s).map(|(&t, &s)| vec![t, s]).collect();
    write_csv(&dir.join("envelope.csv"), "t,S", &rows)?;
    plot(cfg, dir, "envelope", Axes::SemilogY)?;

    let mut report = Report::default();
    report.info("envelope:K", k);
    report.info("envelope:S_final", *curve.s.last().unwrap_or(&env.e0));
    let rise = curve.s.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    report.at_most("envelope:max_increase", rise, 0.0);

    let st = example_settings(cfg, Some(k));
    let mut golden = String::from("example,max_rel_err,threshold,pass\n");
    for id in cfg.example_ids()? {
        let run = run_example(id, &st)?;
        let pass = run.max_rel_err <= env.golden_tol;
        golden.push_str(&format!("{id},{},{},{pass}\n", fmt_f64(run.max_rel_err), fmt_f64(env.golden_tol)));
        report.at_most(format!("golden:{id}"), run.max_rel_err, env.golden_tol);
        let mut rows = Vec::with_capacity(run.curve.len());
        for (&tau, &s) in run.curve.t.iter().zip(&run.curve.s) {
            rows.push(vec![tau, s, closed_form(id, &run.params, run.params.t0 * (tau + 1.0))?]);
        }
        let name = format!("envelope_{id}");
        write_csv(&dir.join(format!("{name}.csv")), "t,S,closed_form", &rows)?;
        plot(cfg, dir, &name, Axes::SemilogY)?;
    }
    write_file(&dir.join("golden.csv"), &golden)?;
    Ok(report)
}

fn simulate(cfg: &ExperimentConfig, dir: &Path) -> Result<Report, CliError> {
    let sim = cfg.simulate.as_ref().expect("validated");
    let config = cfg.sim_config()?;
    let grid = config.grid.clone();
    let out = run_full(&config)?;
    let tr = &out.trace;

    let rows: Vec<Vec<f64>> =
        (0..tr.len()).map(|i| vec![tr.times[i], tr.energy[i], tr.damping[i], tr.obs_num[i]]).collect();
    write_csv(&dir.join("trace.csv"), "t,E,D,obs_num", &rows)?;
    plot(cfg, dir, "trace", Axes::SemilogY)?;
    let (header, snapshot): (&str, Vec<Vec<f64>>) = if grid.dim() == 1 {
        (
            "x,u,v",
            (0..grid.len()).map(|i| vec![grid.position(i)[0], out.final_state.u[i], out.final_state.v[i]]).collect(),
        )
    } else {
        (
            "x,y,u,v",
            (0..grid.len())
                .map(|i| {
                    let [x, y] = grid.position(i);
                    vec![x, y, out.final_state.u[i], out.final_state.v[i]]
                })
                .collect(),
        )
    };
    write_csv(&dir.join("snapshot.csv"), header, &snapshot)?;

    let mut report = Report::default();
    let last = tr.len() - 1;
    if last > 0 && tr.energy[0] > 0.0 {
        let res = energy_identity_residual(tr, 0, last)?;
        report.at_most("energy_identity:abs_residual", res.abs(), sim.residual_tol);
    }
    report.info("energy:E0", tr.energy[0]);
    report.info("energy:E_final", tr.energy[last]);
    report.info("max_abs_u", out.max_abs_u);
    let rise = tr.energy.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    report.info("energy:max_increase", rise);
    let t_obs = sim.observability_time.unwrap_or(sim.t_max.min(4.0));
    if let Ok(qv) = observability_quotient(tr, t_obs) {
        report.info("observability:quotient", qv);
    }
    let burn_in = sim.fit_burn_in.unwrap_or(sim.t_max / 4.0);
    for model in DecayModel::ALL {
        if let Ok(fit) = fit_decay(tr, model, burn_in) {
            report.info(format!("fit:{model}:parameter"), fit.parameter);
            report.info(format!("fit:{model}:r2"), fit.r2);
        }
    }
    Ok(report)
}

fn raytrace(cfg: &ExperimentConfig, dir: &Path) -> Result<Report, CliError> {
    let rt = cfg.raytrace.as_ref().expect("validated");
    if rt.extent.len() == 1 {
        raytrace_dim::<1>(cfg, dir)
    } else {
        raytrace_dim::<2>(cfg, dir)
    }
}

fn to_array<const D: usize>(v: &[f64]) -> [f64; D] {
    let mut out = [0.0; D];
    out.copy_from_slice(&v[..D]);
    out
}

fn medium<const D: usize>(mc: &MediumConfig) -> MediumFields<D> {
    match mc {
        MediumConfig::Constant { rho, k } => {
            let mut m: Matrix<D> = [[0.0; D]; D];
            for i in 0..D {
                for j in 0..D {
                    m[i][j] = match k {
                        Some(k) => k[i][j],
                        None => f64::from(u8::from(i == j)),
                    };
                }
            }
            MediumFields::Constant { rho: *rho, k: m }
        }
        MediumConfig::Radial { curvature, center } => {
            MediumFields::RadialDensity { center: center.as_deref().map_or([0.0; D], to_array), curvature: *curvature }
        }
        MediumConfig::Anisotropic { rho, base, slope } => {
            MediumFields::DiagonalAnisotropic { rho: *rho, base: to_array(base), slope: to_array(slope) }
        }
    }
}

fn raytrace_dim<const D: usize>(cfg: &ExperimentConfig, dir: &Path) -> Result<Report, CliError> {
    let rt = cfg.raytrace.as_ref().expect("validated");
    let med = medium::<D>(&rt.medium);
    let domain = BoxDomain::new(to_array::<D>(&rt.extent))?;
    let mut corners = vec![[0.0; D], domain.extent];
    if D == 2 {
        corners.push(to_array(&[domain.extent[0], 0.0]));
        corners.push(to_array(&[0.0, domain.extent[1]]));
    }
    med.validate(&corners)?;
    let bundle = sample_bundle(&domain, rt.n_pos, rt.n_dir)?;
    let collar = domain.collar(rt.collar_width);
    let gcc = gcc_entry_time(&med, &domain, &collar, &bundle, rt.t_max, rt.ds)?;

    let mut gcc_csv = String::from(if D == 1 { "ray_id,x0,dir,entry_time\n" } else { "ray_id,x0,y0,dir,entry_time\n" });
    for (i, ((x, d), t)) in bundle.iter().zip(&gcc.entry_times).enumerate() {
        let mut fields = vec![i.to_string()];
        fields.extend(x.iter().map(|&v| fmt_f64(v)));
        fields.push(fmt_f64(if D == 1 { d[0] } else { d[1].atan2(d[0]) }));
        fields.push(fmt_f64(*t));
        gcc_csv.push_str(&fields.join(","));
        gcc_csv.push('\n');
    }
    write_file(&dir.join("gcc.csv"), &gcc_csv)?;

    let (x0, dir0, s_max) = match &rt.probe {
        Some(p) => (to_array::<D>(&p.x), to_array::<D>(&p.dir), p.s_max),
        None => {
            let mut e1 = [0.0; D];
            e1[0] = 1.0;
            let mut centre = domain.extent;
            centre.iter_mut().for_each(|c| *c *= 0.5);
            (centre, e1, 5.0)
        }
    };
    let n = (s_max / rt.ds).round().max(2.0) as usize;
    let path = flow(&med, make_null(&med, x0, -1.0, dir0)?, rt.ds, n)?;
    let mut rows = Vec::with_capacity(path.points.len());
    for (s, pp) in path.s.iter().zip(&path.points) {
        let mut row = vec![*s, pp.t];
        row.extend_from_slice(&pp.x);
        row.push(pp.tau);
        row.extend_from_slice(&pp.xi);
        row.push(normalized_symbol(&med, pp));
        rows.push(row);
    }
    let header = if D == 1 { "s,t,x1,tau,xi1,ptilde" } else { "s,t,x1,x2,tau,xi1,xi2,ptilde" };
    write_csv(&dir.join("ray.csv"), header, &rows)?;
    let geo = geodesic_residual(&med, &path)?;

    let mut report = Report::default();
    report.info("gcc:T0", gcc.t0);
    report.info("gcc:worst_ray", gcc.worst_ray as f64);
    report.info("gcc:rays", bundle.len() as f64);
    report.at_most("probe:symbol_drift", path.symbol_drift, rt.drift_tol);
    report.info("probe:geodesic_xi_residual", geo.max_xi_res);
    report.info("probe:geodesic_speed_residual", geo.max_speed_res);
    Ok(report)
}

/// Envelope decay families of the two summary tables, solved and classified.
fn reproduce(cfg: &ExperimentConfig, dir: &Path) -> Result<Report, CliError> {
    let st = example_settings(cfg, None);
    let tol = cfg.envelope.as_ref().map_or(1e-5, |e| e.golden_tol);
    let mut report = Report::default();
    let mut csv = String::from("table,example_id,feedback,ode,decay_law,max_rel_err,best_fit,fit_parameter,fit_r2\n");
    for id in ExampleId::ALL {
        let run = run_example(id, &st)?;
        report.at_most(format!("golden:{id}"), run.max_rel_err, tol);
        // long horizon at a coarser step for the shape classification
        let long = run_example(id, &ExampleSettings { tau_max: 1000.0, dt: 1e-2, ..st })?;
        let stride = 100;
        let t: Vec<f64> = long.curve.t.iter().step_by(stride).copied().collect();
        let s: Vec<f64> = long.curve.s.iter().step_by(stride).copied().collect();
        let mut best = None;
        for model in DecayModel::ALL {
            if let Ok(fit) = fit_series(&t, &s, model, 100.0) {
                if best.is_none_or(|b: crate::wavesim::DecayFit| fit.r2 > b.r2) {
                    best = Some(fit);
                }
            }
        }
        let best = best.ok_or_else(|| CliError::Numeric(format!("no decay model fits {id}")))?;
        report.info(format!("fit:{id}:r2"), best.r2);
        let table = if id.linearly_bounded_at_infinity() { 1 } else { 2 };
        csv.push_str(&format!(
            "{table},{id},{},{},{},{},{},{},{}\n",
            feedback_label(id),
            ode_label(id),
            decay_law_label(id),
            fmt_f64(run.max_rel_err),
            best.model,
            fmt_f64(best.parameter),
            fmt_f64(best.r2)
        ));
    }
    write_file(&dir.join("decay_table.csv"), &csv)?;
    Ok(report)
}
