//! The built-in property suite run by `wavedecay verify`.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::envelope::{
    build_q, lasiecka_sequence, run_example, sequence_q, solve_envelope, ExampleId, ExampleSettings,
};
use crate::feedback::{FeedbackSpec, InfinityBranch, MonotoneFn, OriginBranch};
use crate::raytrace::{flow, gcc_entry_time, geodesic_residual, make_null, sample_bundle, BoxDomain, MediumFields};
use crate::wavesim::{
    self, energy_identity_residual, fit_decay, run_full, CollarSpec, DecayModel, Grid, InitialData, SimConfig,
    SourceSpec, Trace,
};

use super::config::ExperimentConfig;
use super::report::{fmt_f64, write_csv, write_file, Report};
use super::CliError;

fn feedback(origin: OriginBranch) -> FeedbackSpec {
    FeedbackSpec::new(origin, InfinityBranch::Linear { m: 1.0, big_m: 1.0 }).expect("unit-matched branches")
}

fn linear_feedback() -> FeedbackSpec {
    feedback(OriginBranch::Linear { m0: 1.0, big_m0: 1.0 })
}

fn cubic_feedback() -> FeedbackSpec {
    feedback(OriginBranch::Power { exponent: 3.0, m0: 1.0, big_m0: 1.0 })
}

fn collar() -> Option<CollarSpec> {
    Some(CollarSpec { width: 0.1, a0: 1.0, a_max: 1.0 })
}

/// `a·x^b + c·x/(1+x)`: concave, increasing, zero at the origin.
fn random_concave(rng: &mut ChaCha8Rng) -> MonotoneFn {
    let a = rng.gen_range(0.1..5.0);
    let b = rng.gen_range(0.2..1.0);
    let c = rng.gen_range(0.0..2.0);
    MonotoneFn::from_fn(move |x: f64| a * x.powf(b) + c * x / (1.0 + x), 1e9, true)
}

pub(super) fn run(cfg: &ExperimentConfig, dir: &Path) -> Result<Report, CliError> {
    let opts = cfg.verify.clone().unwrap_or_default();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut report = Report::default();

    // closed-form envelopes
    let st = ExampleSettings::default();
    let mut golden = String::from("example,max_rel_err\n");
    for id in ExampleId::ALL {
        let r = run_example(id, &st)?;
        report.at_most(format!("golden:{id}"), r.max_rel_err, 1e-5);
        golden.push_str(&format!("{id},{}\n", fmt_f64(r.max_rel_err)));
    }
    write_file(&dir.join("golden.csv"), &golden)?;

    // q construction
    let q = build_q(&MonotoneFn::identity(), 1.0)?;
    let err = (0..=1000).map(|i| 0.01 * i as f64).map(|x| (q.eval(x) - x / 3.0).abs()).fold(0.0, f64::max);
    report.at_most("q:identity_vs_x_over_3", err, 1e-9);
    let mut violations = 0usize;
    for _ in 0..opts.random_cases {
        let h = random_concave(&mut rng);
        let k = rng.gen_range(0.2..5.0);
        let q = build_q(&h, k)?;
        let mut prev = 0.0;
        for i in 0..=1000 {
            let x = 0.01 * i as f64;
            let v = q.eval(x);
            if !(v >= 0.0 && v <= x + 1e-12 && v >= prev - 1e-12) {
                violations += 1;
            }
            prev = v;
        }
    }
    report.at_most("q:random_concave_violations", violations as f64, 0.0);

    // discrete recursion dominated by the envelope
    let mut worst: f64 = f64::NEG_INFINITY;
    let mut recursion = Vec::new();
    for case in 0..opts.random_cases {
        let p = random_concave(&mut rng);
        let q = sequence_q(&p);
        for s0 in [0.1, 1.0, 10.0] {
            let seq = lasiecka_sequence(&p, s0, 100)?;
            let env = solve_envelope(&q, s0, 100.0, 0.05)?;
            let excess = (0..=100).map(|m| seq.s[m] - env.s[20 * m]).fold(f64::NEG_INFINITY, f64::max);
            worst = worst.max(excess);
            recursion.push(vec![case as f64, s0, excess]);
        }
    }
    write_csv(&dir.join("recursion.csv"), "case,s0,max_excess", &recursion)?;
    report.at_most("recursion:max_excess", worst, 1e-8);

    // energy identity and its order
    let grid = Grid::new_1d(1.0, 401)?;
    let identity_run = |dt: f64| -> Result<Trace, CliError> {
        let mut c = SimConfig::new(
            grid.clone(),
            cubic_feedback(),
            dt,
            10.0,
            InitialData::Gaussian { amplitude: 2.0, center: [0.4, 0.0], width: 0.1 },
        );
        c.source = Some(SourceSpec::new(3.0, None)?);
        c.collar = collar();
        Ok(wavesim::run(&c)?)
    };
    let coarse = identity_run(1e-3)?;
    let fine = identity_run(5e-4)?;
    let r1 = energy_identity_residual(&coarse, 0, coarse.len() - 1)?.abs();
    let r2 = energy_identity_residual(&fine, 0, fine.len() - 1)?.abs();
    let rows: Vec<Vec<f64>> = (0..coarse.len())
        .step_by(10)
        .map(|i| vec![coarse.times[i], coarse.energy[i], coarse.damping[i], coarse.obs_num[i]])
        .collect();
    write_csv(&dir.join("energy_trace.csv"), "t,E,D,obs_num", &rows)?;
    report.at_most("energy_identity:abs_residual", r1, 1e-4);
    report.within("energy_identity:halving_ratio", r1 / r2, 3.0, 5.0);

    // conservation without damping or source
    let c = SimConfig::new(
        grid.clone(),
        linear_feedback(),
        2.5e-4,
        10.0,
        InitialData::Mode { amplitude: 1.0, kx: 1, ky: 1 },
    );
    let tr = wavesim::run(&c)?;
    let drift = tr.energy.iter().map(|e| (e - tr.energy[0]).abs()).fold(0.0, f64::max) / tr.energy[0];
    report.at_most("conservation:relative_drift", drift, 1e-6);

    if opts.decay_forms {
        let small = Grid::new_1d(1.0, 101)?;
        let mut c = SimConfig::new(
            small.clone(),
            linear_feedback(),
            2e-3,
            40.0,
            InitialData::Mode { amplitude: 0.5, kx: 1, ky: 1 },
        );
        c.collar = collar();
        c.sample_every = 50;
        let tr = wavesim::run(&c)?;
        let exp = fit_decay(&tr, DecayModel::Exponential, 10.0)?;
        let pow = fit_decay(&tr, DecayModel::Power, 10.0)?;
        report.at_least("decay:linear_exponential_r2", exp.r2, 0.99);
        report.at_least("decay:linear_exp_minus_power_r2", exp.r2 - pow.r2, 0.0);
        let mut c =
            SimConfig::new(small, cubic_feedback(), 4e-3, 1000.0, InitialData::Mode { amplitude: 1.0, kx: 1, ky: 1 });
        c.collar = collar();
        c.sample_every = 50;
        let tr = wavesim::run(&c)?;
        let pow = fit_decay(&tr, DecayModel::Power, 250.0)?;
        report.within("decay:cubic_power_exponent", pow.parameter, -1.3, -0.7);
    }

    // rays
    let radial = MediumFields::<2>::radial();
    let pp = make_null(&radial, [0.5, 0.2], -1.0, [1.0, 0.3])?;
    let path = flow(&radial, pp, 1e-3, 5000)?;
    report.at_most("ray:symbol_drift", path.symbol_drift, 1e-8);
    let res_at = |ds: f64| -> Result<f64, CliError> {
        let path = flow(&radial, pp, ds, (2.0 / ds).round() as usize)?;
        Ok(geodesic_residual(&radial, &path)?.max_xi_res)
    };
    let (g1, g2) = (res_at(2e-2)?, res_at(1e-2)?);
    report.within("ray:geodesic_halving_ratio", g1 / g2, 3.0, 5.0);
    let line = BoxDomain::new([1.0])?;
    let bundle = sample_bundle(&line, 999, 2)?;
    let ds = 1e-3;
    let gcc = gcc_entry_time(&MediumFields::<1>::trivial(), &line, &line.collar(0.1), &bundle, 5.0, ds)?;
    report.at_most("ray:gcc_deviation_from_0.8", (gcc.t0 - 0.8).abs(), 2.0 * ds);

    // truncation
    let tgrid = Grid::new_1d(1.0, 201)?;
    let trunc_run = |k: Option<f64>| -> Result<(Trace, f64), CliError> {
        let mut c = SimConfig::new(
            tgrid.clone(),
            cubic_feedback(),
            1e-3,
            5.0,
            InitialData::Gaussian { amplitude: 1.5, center: [0.5, 0.0], width: 0.1 },
        );
        c.source = Some(SourceSpec::new(3.0, k)?);
        c.collar = collar();
        let out = run_full(&c)?;
        Ok((out.trace, out.max_abs_u))
    };
    let (t_inf, max_u) = trunc_run(None)?;
    let diff = |a: &Trace, b: &Trace| a.energy.iter().zip(&b.energy).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    report.at_most("truncation:max_abs_u", max_u, 2.0);
    let d4 = diff(&trunc_run(Some(4.0))?.0, &t_inf);
    let d8 = diff(&trunc_run(Some(8.0))?.0, &t_inf);
    report.at_most("truncation:k4_vs_untruncated", d4, 1e-12);
    report.at_most("truncation:k8_vs_untruncated", d8, 1e-12);
    let d1 = diff(&trunc_run(Some(1.0))?.0, &t_inf);
    report.at_least("truncation:k1_divergence", d1, 1e-6);

    Ok(report)
}
