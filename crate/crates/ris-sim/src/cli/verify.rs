//! Self-contained oracle suites behind the `verify` command.
//!
//! Each check pits an implementation against an independent route: exhaustive
//! enumeration against the greedy threshold rule, brute-force codebook search
//! against per-element alignment, finite differences against backpropagation,
//! and the algebraic identities of the SINR expressions. Any failure is a
//! release blocker.

use num_complex::Complex64;
use rand::Rng;

use crate::channel::{pathloss_direct, pathloss_reflected, sample_cn01, stream_rng, CascadeChannel};
use crate::control::{always_on, exhaustive_onoff, tpc_onoff};
use crate::error::Result;
use crate::geom::{haversine_m, to_local, GeoPoint};
use crate::link::{sinr, sinr_direct, LinkBudget, OnOffVector, ScaledCascade, UserChannel};
use crate::predictor::gradient_check;
use crate::ris::{align_phases, build_codebook, exhaustive_phases, PhaseConfig};

/// One verification row.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    /// Worst observed value.
    pub measured: f64,
    /// Limit it must stay under (or over, see `direction`).
    pub tolerance: f64,
    pub pass: bool,
    pub detail: String,
}

/// Full verification outcome.
#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// Fixed-width table, one line per check.
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:<44} {:>14} {:>12}  {}\n",
            "check", "measured", "tolerance", "result"
        ));
        for c in &self.checks {
            out.push_str(&format!(
                "{:<44} {:>14.6e} {:>12.1e}  {}{}\n",
                c.name,
                c.measured,
                c.tolerance,
                if c.pass { "PASS" } else { "FAIL" },
                if c.detail.is_empty() {
                    String::new()
                } else {
                    format!("  ({})", c.detail)
                }
            ));
        }
        out
    }
}

fn random_budget(seed: u64, surfaces: usize, elements: usize, interferers: usize) -> LinkBudget {
    let mut rng = stream_rng(seed, &[u64::from_le_bytes(*b"verbudg_")]);
    let mut user = |cascade_scale: f64| -> UserChannel {
        UserChannel {
            direct: 1e-3 * sample_cn01(&mut rng, 1)[0],
            cascades: (0..surfaces)
                .map(|_| ScaledCascade {
                    channel: CascadeChannel::new(
                        sample_cn01(&mut rng, elements)
                            .iter()
                            .map(|h| cascade_scale * h)
                            .collect(),
                        sample_cn01(&mut rng, elements),
                    )
                    .expect("non-empty"),
                    atten: rng.random_range(0.05..1.0),
                })
                .collect(),
        }
    };
    LinkBudget {
        p_tx: 1.0,
        noise: 1e-12,
        desired: user(1e-4),
        interferers: (0..interferers).map(|_| user(1e-4)).collect(),
    }
}

/// Gradient check: analytic BPTT vs central finite differences, H = 4.
fn check_gradients() -> Check {
    let report = gradient_check(4, 2024, 1e-5);
    Check {
        name: "lstm gradients vs finite differences (H=4)".into(),
        measured: report.max_rel_err,
        tolerance: 1e-4,
        pass: report.max_rel_err < 1e-4,
        detail: format!("{} parameter groups", report.per_group.len()),
    }
}

/// The exhaustive ON-OFF search must dominate the greedy threshold rule and
/// the always-on baseline on every instance.
fn check_onoff_oracle() -> Check {
    let cb = build_codebook(2).expect("b=2");
    let mut worst_gap = f64::INFINITY;
    let mut violations = 0usize;
    for seed in 0..50 {
        let b = random_budget(seed, 8, 8, 5);
        let oracle = exhaustive_onoff(&b, &cb).expect("oracle");
        let greedy = tpc_onoff(&b, &cb).expect("greedy");
        let aon = always_on(&b, &cb).expect("always on");
        let direct = sinr_direct(&b).expect("direct");
        let gap = oracle.gamma - greedy.gamma.max(aon.gamma).max(direct);
        worst_gap = worst_gap.min(gap);
        if gap < 0.0 {
            violations += 1;
        }
    }
    Check {
        name: "exhaustive on-off dominates greedy/always-on".into(),
        measured: worst_gap,
        tolerance: 0.0,
        pass: violations == 0,
        detail: "50 random instances, R=8".into(),
    }
}

/// With a single surface the greedy rule IS exhaustive.
fn check_single_surface_equality() -> Check {
    let cb = build_codebook(2).expect("b=2");
    let mut mismatches = 0usize;
    for seed in 100..200 {
        let b = random_budget(seed, 1, 6, 4);
        let g = tpc_onoff(&b, &cb).expect("greedy");
        let e = exhaustive_onoff(&b, &cb).expect("oracle");
        if g.v.states() != e.v.states() || g.gamma.to_bits() != e.gamma.to_bits() {
            mismatches += 1;
        }
    }
    Check {
        name: "greedy equals exhaustive at R=1".into(),
        measured: mismatches as f64,
        tolerance: 0.0,
        pass: mismatches == 0,
        detail: "100 random single-surface instances".into(),
    }
}

/// Per-element alignment within 0.5 dB of the brute-force codebook optimum.
fn check_codebook_alignment() -> Check {
    let cb = build_codebook(2).expect("b=2");
    let mut rng = stream_rng(7, &[u64::from_le_bytes(*b"vercode_")]);
    let mut worst_db = 0.0f64;
    let objective = |d: Complex64, c: &[Complex64], cfg: &PhaseConfig| -> f64 {
        c.iter()
            .zip(cfg.coefficients())
            .fold(d, |acc, (ci, e)| acc + ci * e)
            .norm_sqr()
    };
    for _ in 0..100 {
        let direct = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let cascade: Vec<Complex64> = (0..3)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let a = objective(direct, &cascade, &align_phases(direct, &cascade, &cb));
        let e = objective(direct, &cascade, &exhaustive_phases(direct, &cascade, &cb));
        worst_db = worst_db.max(10.0 * (e / a).log10());
    }
    Check {
        name: "phase alignment within 0.5 dB of exhaustive".into(),
        measured: worst_db,
        tolerance: 0.5,
        pass: worst_db <= 0.5,
        detail: "100 random instances, N=3, b=2".into(),
    }
}

/// All surfaces off must reproduce the direct-link SINR to the last bit.
fn check_sinr_consistency() -> Check {
    let mut mismatches = 0usize;
    for seed in 0..1000 {
        let b = random_budget(seed, 4, 4, 5);
        let configs = vec![PhaseConfig::zeros(4); 4];
        let g0 = sinr(&b, &OnOffVector::all_off(4), &configs).expect("sinr");
        let gd = sinr_direct(&b).expect("direct");
        if g0.to_bits() != gd.to_bits() {
            mismatches += 1;
        }
    }
    Check {
        name: "sinr(all off) equals direct-link sinr bit-exactly".into(),
        measured: mismatches as f64,
        tolerance: 0.0,
        pass: mismatches == 0,
        detail: "1000 random budgets".into(),
    }
}

/// Product-distance identity of the reflected path loss.
fn check_pathloss_identity() -> Check {
    let mut rng = stream_rng(3, &[u64::from_le_bytes(*b"verploss")]);
    let mut mismatches = 0usize;
    for _ in 0..1000 {
        let (a, b) = (rng.random_range(0.1..1e3), rng.random_range(0.1..1e3));
        let alpha = rng.random_range(2.0..4.0);
        let r = pathloss_reflected(1e-4, a, b, alpha).expect("reflected");
        let d = pathloss_direct(1e-4, a * b, alpha).expect("direct");
        if r.to_bits() != d.to_bits() {
            mismatches += 1;
        }
    }
    Check {
        name: "reflected pathloss equals direct at product distance".into(),
        measured: mismatches as f64,
        tolerance: 0.0,
        pass: mismatches == 0,
        detail: "1000 random triples".into(),
    }
}

/// Near the projection origin the planar distance must match the great
/// circle to one part in ten thousand.
fn check_projection_agreement() -> Check {
    let mut rng = stream_rng(5, &[u64::from_le_bytes(*b"verproj_")]);
    let origin = GeoPoint::fixed(39.98, 116.32);
    let mut worst = 0.0f64;
    for _ in 0..500 {
        let p = GeoPoint::fixed(
            origin.lat + rng.random_range(-0.01..0.01),
            origin.lon + rng.random_range(-0.01..0.01),
        );
        let h = haversine_m(&origin, &p);
        if h < 1.0 {
            continue;
        }
        let l = to_local(&origin, &p).expect("in range").norm();
        worst = worst.max((h - l).abs() / h);
    }
    Check {
        name: "planar projection agrees with great circle".into(),
        measured: worst,
        tolerance: 1e-4,
        pass: worst <= 1e-4,
        detail: "points within 0.01 deg of origin".into(),
    }
}

/// Run every verification suite.
pub fn run_verification() -> Result<VerifyReport> {
    Ok(VerifyReport {
        checks: vec![
            check_gradients(),
            check_onoff_oracle(),
            check_single_surface_equality(),
            check_codebook_alignment(),
            check_sinr_consistency(),
            check_pathloss_identity(),
            check_projection_agreement(),
        ],
    })
}
