//! Acceptance suite: one test per criterion, each printing a pass/fail line.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use masstat::control::{run_analytic_schedule, StopRule};
use masstat::estimates::{derive_alpha_beta, higher_order_gaps, higher_order_switch_value};
use masstat::fdm::{run_fdm_schedule, trapezoid_mass, FdmConfig};
use masstat::model::{Phase, PhysicalParams};
use masstat::series::SeriesConfig;
use masstat::Schedule;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

const PI2: f64 = PI * PI;

fn report(name: &str, pass: bool) {
    println!(
        "acceptance: {name} ... {}",
        if pass { "PASS" } else { "FAIL" }
    );
}

fn table1_params() -> PhysicalParams {
    PhysicalParams::new(0.05, 10.0, 7.0, 3.0).unwrap()
}

fn table2_params() -> PhysicalParams {
    PhysicalParams::new(0.05, 10.0, 5.0, 2.0).unwrap()
}

fn series(num_modes: usize, crossing_tol: f64) -> SeriesConfig {
    SeriesConfig {
        num_modes,
        crossing_tol,
        mass_tail_tol: 1.0,
    }
}

/// Mean of the late-half gaps ending the given phase.
fn late_gap(schedule: &Schedule, phase: Phase) -> f64 {
    let start = schedule.events.len() / 2;
    let gaps: Vec<f64> = schedule.events[start..]
        .iter()
        .filter(|event| event.ended_phase == phase)
        .map(|event| event.gap)
        .collect();
    assert!(!gaps.is_empty(), "no settled {phase:?} gaps");
    gaps.iter().sum::<f64>() / gaps.len() as f64
}

#[test]
fn criterion_1_constant_gap_table_reproduction() {
    let dt = 0.1;
    let cfg = FdmConfig::new(50, dt, 20.0).unwrap();
    let run = run_fdm_schedule(&cfg, &table1_params()).unwrap();
    let events = &run.schedule.events;

    let mut pass = events.len() >= 14;
    if pass {
        pass &= (events[0].t - 2.1).abs() <= dt + 1e-12;
        for event in &events[1..14] {
            pass &= (event.gap - 1.2).abs() <= dt + 1e-12;
        }
    }
    report(
        "criterion 1: dt=0.1 run gives T1 = 2.1 and gaps 1.2 for n = 2..14 (within one step)",
        pass,
    );
    assert!(
        pass,
        "switch times: {:?}",
        events.iter().map(|event| event.t).collect::<Vec<_>>()
    );
}

#[test]
fn criterion_2_alternating_gap_table_reproduction() {
    let dt = 0.02;
    let cfg = FdmConfig::new(50, dt, 20.0).unwrap();
    let run = run_fdm_schedule(&cfg, &table2_params()).unwrap();
    let events = &run.schedule.events;

    let mut pass = events.len() >= 20;
    if pass {
        for event in &events[2..] {
            let expected = if event.n % 2 == 1 { 0.48 } else { 1.02 };
            pass &= (event.gap - expected).abs() <= 2.0 * dt + 1e-12;
        }
    }
    report(
        "criterion 2: dt=0.02 run alternates gaps 0.48 (up) / 1.02 (down) from n = 3 (within 2 steps)",
        pass,
    );
    assert!(
        pass,
        "gaps: {:?}",
        events.iter().map(|event| event.gap).collect::<Vec<_>>()
    );
}

#[test]
fn criterion_3_single_mode_matches_closed_forms() {
    let mut pass = true;
    let mut worst_value = 0.0f64;
    let mut worst_gap = 0.0f64;
    for &alpha in &[0.1, 0.25, 0.4] {
        let params =
            PhysicalParams::new(1.0, 1.0, 8.0 / PI2 * (1.0 - alpha), 8.0 / PI2 * alpha).unwrap();
        let schedule =
            run_analytic_schedule(&params, &series(1, 1e-12), StopRule::MaxSwitches(20)).unwrap();
        let constant_gap = ((1.0 - alpha) / alpha).ln() / PI2;
        for event in &schedule.events {
            let value = (-PI2 * event.t).exp();
            let expected = alpha.powi(event.n as i32) / (1.0 - alpha).powi(event.n as i32 - 1);
            worst_value = worst_value.max((value - expected).abs());
            if event.n >= 2 {
                worst_gap = worst_gap.max((event.gap - constant_gap).abs());
            }
        }
    }
    pass &= worst_value <= 1e-9 && worst_gap <= 1e-9;
    report(
        "criterion 3: K=1 schedule matches exp(-pi^2 t_n) = a^n/(1-a)^(n-1) and constant gaps to 1e-9",
        pass,
    );
    assert!(
        pass,
        "worst value dev {worst_value:.3e}, worst gap dev {worst_gap:.3e}"
    );
}

#[test]
fn criterion_4_switch_value_recursions() {
    // Brute-force check of the alternating-bracket recursions the closed
    // forms must satisfy:
    //   v_n * sum_{j=0}^{n-1} (-1)^j     / v_j = alpha  (odd n, charge end)
    //   v_n * sum_{j=0}^{n-1} (-1)^(j+1) / v_j = beta   (even n, discharge end)
    // with v_0 = 1, evaluated directly from the emitted values.
    let mut rng = ChaCha8Rng::seed_from_u64(0xace5);
    let mut draws = 0;
    let mut worst = 0.0f64;
    while draws < 100 {
        let alpha: f64 = rng.gen_range(0.02..0.95);
        let beta: f64 = rng.gen_range(0.02..0.95);
        if alpha + beta >= 0.98 {
            continue;
        }
        draws += 1;
        let est = masstat::EstimateParams::new(alpha, beta).unwrap();
        let values: Vec<f64> = (1..=21)
            .map(|n| higher_order_switch_value(n, &est))
            .collect();
        let at = |j: usize| if j == 0 { 1.0 } else { values[j - 1] };
        for n in 1..=20usize {
            let bracket: f64 = (0..n)
                .map(|j| {
                    let sign = if (n % 2 == 1) == (j % 2 == 0) {
                        1.0
                    } else {
                        -1.0
                    };
                    sign / at(j)
                })
                .sum();
            let target = if n % 2 == 1 { alpha } else { beta };
            let rel = (at(n) * bracket - target).abs() / target;
            worst = worst.max(rel);
        }
    }
    let pass = worst <= 1e-12;
    report(
        "criterion 4: switch-value recursions hold to 1e-12 relative over 100 random (alpha, beta)",
        pass,
    );
    assert!(pass, "worst relative residual {worst:.3e}");
}

#[test]
fn criterion_5_grid_refinement_converges_to_spectral_times() {
    let params = table1_params();
    let reference = run_analytic_schedule(&params, &series(64, 1e-10), StopRule::MaxSwitches(5))
        .unwrap()
        .events[4]
        .t;

    let mut errors = Vec::new();
    for scale in [1usize, 2, 4] {
        let cfg = FdmConfig::new(50 * scale, 0.1 / scale as f64, 20.0).unwrap();
        let run = run_fdm_schedule(&cfg, &params).unwrap();
        errors.push((run.schedule.events[4].t - reference).abs());
    }
    let monotone = errors[0] > errors[1] && errors[1] > errors[2];
    let order = (errors[0] / errors[2]).log2() / 2.0;
    let pass = monotone && order >= 0.8;
    report(
        "criterion 5: t_5 errors shrink monotonically under (dt, dx) halving with order >= 0.8",
        pass,
    );
    assert!(
        pass,
        "reference t_5 = {reference:.6}, errors {errors:?}, observed order {order:.3}"
    );
}

#[test]
fn criterion_6_estimates_agree_with_numerical_gaps() {
    let mut pass = true;

    // constant-gap table parameters: symmetric estimate vs fdm gap 1.2
    let params1 = table1_params();
    let est1 = derive_alpha_beta(&params1).unwrap();
    let (down1, up1) = higher_order_gaps(&est1, params1.diffusivity).unwrap();
    let fdm1 = run_fdm_schedule(&FdmConfig::new(50, 0.1, 20.0).unwrap(), &params1)
        .unwrap()
        .schedule;
    let fdm1_up = late_gap(&fdm1, Phase::Charging);
    let fdm1_down = late_gap(&fdm1, Phase::Discharging);
    pass &= (up1 - fdm1_up).abs() / fdm1_up <= 0.15;
    pass &= (down1 - fdm1_down).abs() / fdm1_down <= 0.15;

    // alternating-gap table parameters: asymmetric estimate vs 0.48 / 1.02
    let params2 = table2_params();
    let est2 = derive_alpha_beta(&params2).unwrap();
    let (down2, up2) = higher_order_gaps(&est2, params2.diffusivity).unwrap();
    let fdm2 = run_fdm_schedule(&FdmConfig::new(50, 0.02, 20.0).unwrap(), &params2)
        .unwrap()
        .schedule;
    let fdm2_up = late_gap(&fdm2, Phase::Charging);
    let fdm2_down = late_gap(&fdm2, Phase::Discharging);
    pass &= (up2 - fdm2_up).abs() / fdm2_up <= 0.20;
    pass &= (down2 - fdm2_down).abs() / fdm2_down <= 0.20;

    // spectral gaps land strictly between estimate and fdm, or within one
    // fdm step of the fdm value
    let mut check_between = |analytic: f64, estimate: f64, fdm: f64, dt: f64| {
        let lo = estimate.min(fdm);
        let hi = estimate.max(fdm);
        let ok = (analytic > lo && analytic < hi) || (analytic - fdm).abs() <= dt;
        pass &= ok;
        (analytic, lo, hi, ok)
    };
    let spectral_cfg = SeriesConfig::default();
    let analytic1 =
        run_analytic_schedule(&params1, &spectral_cfg, StopRule::Horizon(20.0)).unwrap();
    let a1 = check_between(late_gap(&analytic1, Phase::Charging), up1, fdm1_up, 0.1);
    let a2 = check_between(
        late_gap(&analytic1, Phase::Discharging),
        down1,
        fdm1_down,
        0.1,
    );
    let analytic2 =
        run_analytic_schedule(&params2, &spectral_cfg, StopRule::Horizon(20.0)).unwrap();
    let a3 = check_between(late_gap(&analytic2, Phase::Charging), up2, fdm2_up, 0.02);
    let a4 = check_between(
        late_gap(&analytic2, Phase::Discharging),
        down2,
        fdm2_down,
        0.02,
    );

    report(
        "criterion 6: first-mode gap estimates within 15%/20% of fdm gaps, spectral gaps in between",
        pass,
    );
    assert!(
        pass,
        "estimates (down, up): ({down1:.4}, {up1:.4}) vs fdm ({fdm1_down:.4}, {fdm1_up:.4}); \
         ({down2:.4}, {up2:.4}) vs ({fdm2_down:.4}, {fdm2_up:.4}); \
         between-checks {a1:?} {a2:?} {a3:?} {a4:?}"
    );
}

#[test]
fn criterion_7_randomized_property_suites() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x7777);
    let mut pass = true;

    // discrete maximum principle + spatial symmetry + mass corridor,
    // 100 randomized finite-difference runs each (snapshots at every step)
    for case in 0..100 {
        let u0 = rng.gen_range(0.5..15.0);
        let a = rng.gen_range(0.02..1.0);
        let panels = rng.gen_range(8..=64);
        let dt = rng.gen_range(0.02..0.3);
        let steps = rng.gen_range(40..=160);
        let f_upper = rng.gen_range(0.25..0.8);
        let f_lower = f_upper * rng.gen_range(0.1..0.85);
        let params = PhysicalParams::new(a, u0, f_upper * u0, f_lower * u0).unwrap();
        let cfg = FdmConfig::new(panels, dt, dt * steps as f64)
            .unwrap()
            .with_snapshot_stride(1)
            .unwrap();
        let run = run_fdm_schedule(&cfg, &params).unwrap();

        // maximum principle
        let slack = 1e-9 * u0;
        for snap in &run.snapshots {
            for &value in &snap.values {
                if !(value >= -slack && value <= u0 + slack) {
                    pass = false;
                    eprintln!("case {case}: node value {value} outside [0, {u0}]");
                }
            }
            // spatial symmetry
            for j in 0..snap.values.len() / 2 {
                let mirror = snap.values[snap.values.len() - 1 - j];
                if (snap.values[j] - mirror).abs() > 1e-12 * u0.max(1.0) {
                    pass = false;
                    eprintln!("case {case}: asymmetry {} vs {mirror}", snap.values[j]);
                }
            }
        }

        // mass corridor after the first switch, up to one step's change
        if let Some(first) = run.schedule.events.first() {
            let mut max_change = 0.0f64;
            for pair in run.trace.windows(2) {
                max_change = max_change.max((pair[1].mass - pair[0].mass).abs());
            }
            for record in run.trace.iter().filter(|record| record.t >= first.t) {
                if record.mass < params.lower_mass - max_change
                    || record.mass > params.upper_mass + max_change
                {
                    pass = false;
                    eprintln!("case {case}: mass {} out of corridor", record.mass);
                }
            }
        }

        // switch times strictly increasing
        let mut prev = 0.0;
        for event in &run.schedule.events {
            if event.t <= prev {
                pass = false;
                eprintln!("case {case}: fdm switch times not increasing");
            }
            prev = event.t;
        }
    }

    // spectral schedule monotonicity, 100 randomized draws
    for case in 0..100 {
        let u0 = rng.gen_range(0.5..12.0);
        let a = rng.gen_range(0.02..2.0);
        let num_modes = rng.gen_range(1..=32);
        let limit: f64 = (0..num_modes).map(masstat::series::mass_weight).sum();
        let f_upper = rng.gen_range(0.15..0.85) * limit;
        let f_lower = f_upper * rng.gen_range(0.05..0.9);
        let params = PhysicalParams::new(a, u0, f_upper * u0, f_lower * u0).unwrap();
        let schedule =
            run_analytic_schedule(&params, &series(num_modes, 1e-11), StopRule::MaxSwitches(6))
                .unwrap();
        let mut prev = 0.0;
        for event in &schedule.events {
            if event.t <= prev || event.gap <= 0.0 {
                pass = false;
                eprintln!("case {case}: spectral schedule not strictly increasing");
            }
            prev = event.t;
        }
    }

    // trapezoid exactness on affine data, 100 randomized draws
    for case in 0..100 {
        let panels = rng.gen_range(2..=200);
        let h = 1.0 / panels as f64;
        let offset = rng.gen_range(-5.0..5.0);
        let slope = rng.gen_range(-10.0..10.0);
        let values: Vec<f64> = (0..=panels)
            .map(|j| offset + slope * (j as f64 * h))
            .collect();
        let exact = offset + slope / 2.0;
        let mass = trapezoid_mass(&values, h);
        if (mass - exact).abs() > 1e-13 * (1.0 + exact.abs()) {
            pass = false;
            eprintln!("case {case}: trapezoid {mass} vs exact {exact}");
        }
    }

    report(
        "criterion 7: max principle, symmetry, corridor, monotonicity, trapezoid exactness \
         (100 randomized draws each)",
        pass,
    );
    assert!(pass);
}
