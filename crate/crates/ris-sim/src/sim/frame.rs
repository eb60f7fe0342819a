//! One pilot/configuration/transmission cycle.

use num_complex::Complex64;

use crate::channel::{
    pathloss_direct, pathloss_reflected, sample_cn01, stream_rng, unit_pathloss, CascadeChannel,
};
use crate::control::{
    always_on, direct_only, exhaustive_onoff, reactive_onoff, tpc_onoff, ControlDecision, Strategy,
};
use crate::error::{Error, Result};
use crate::geom::{separation_angle, GeoPoint, LocalPoint};
use crate::link::{LinkBudget, ReflectGains, ScaledCascade, UserChannel};
use crate::ris::{build_codebook, AngleAttenuation};

use super::predictors::PositionPredictor;
use super::Scenario;

// link-class tags for fading sub-streams
const LINK_DIRECT: u64 = 1;
const LINK_RIS_TO_BS: u64 = 2;
const LINK_USER_TO_RIS: u64 = 3;

/// All small-scale fading of one frame. Drawn once and shared by every
/// method: the surface-to-BS legs are common to all users, the rest are per
/// user. Method differences can only come from (V, Phi).
pub struct FrameFading {
    /// g_u per user.
    pub direct: Vec<Complex64>,
    /// h_i per surface, one gain per element.
    pub to_bs: Vec<Vec<Complex64>>,
    /// h_ui per (user, surface), one gain per element.
    pub from_user: Vec<Vec<Vec<Complex64>>>,
}

/// Draw the frame's fading from (seed, frame, link) sub-streams.
pub fn draw_fading(scenario: &Scenario, frame: usize) -> FrameFading {
    let cfg = &scenario.config;
    let f = frame as u64;
    let direct = (0..cfg.users())
        .map(|u| sample_cn01(&mut stream_rng(cfg.seed, &[LINK_DIRECT, f, u as u64]), 1)[0])
        .collect();
    let to_bs = (0..cfg.ris_count)
        .map(|i| {
            sample_cn01(
                &mut stream_rng(cfg.seed, &[LINK_RIS_TO_BS, f, i as u64]),
                cfg.elements,
            )
        })
        .collect();
    let from_user = (0..cfg.users())
        .map(|u| {
            (0..cfg.ris_count)
                .map(|i| {
                    sample_cn01(
                        &mut stream_rng(cfg.seed, &[LINK_USER_TO_RIS, f, u as u64, i as u64]),
                        cfg.elements,
                    )
                })
                .collect()
        })
        .collect();
    FrameFading { direct, to_bs, from_user }
}

/// Assemble the link budget for one set of user positions (index 0 desired).
///
/// Path losses scale the shared fading draws; the angle attenuation of an
/// interferer's reflection comes from its angular separation from the desired
/// user as seen by each surface (the desired user itself is never attenuated:
/// the surface is steered toward it).
pub fn make_budget(
    scenario: &Scenario,
    fading: &FrameFading,
    positions: &[LocalPoint],
) -> Result<LinkBudget> {
    let cfg = &scenario.config;
    if positions.len() != cfg.users() {
        return Err(Error::Sim(format!(
            "{} positions for {} users",
            positions.len(),
            cfg.users()
        )));
    }
    let c_direct = unit_pathloss(&cfg.pathloss_direct);
    let c_reflected = unit_pathloss(&cfg.pathloss_reflected);
    let atten_model = AngleAttenuation::new(cfg.lambda0_rad())?;
    let bs = LocalPoint::new(0.0, 0.0);

    let mut users = Vec::with_capacity(cfg.users());
    for (u, pos) in positions.iter().enumerate() {
        let eta_direct = pathloss_direct(c_direct, pos.dist(&bs), cfg.pathloss_direct.alpha)?;
        let direct = eta_direct.sqrt() * fading.direct[u];

        let mut cascades = Vec::with_capacity(cfg.ris_count);
        for (i, ris) in scenario.ris_positions.iter().enumerate() {
            let eta = pathloss_reflected(
                c_reflected,
                ris.dist(&bs),
                pos.dist(ris),
                cfg.pathloss_reflected.alpha,
            )?;
            let amp = eta.sqrt();
            let to_bs: Vec<Complex64> =
                fading.to_bs[i][..cfg.elements].iter().map(|h| amp * h).collect();
            let from_user = fading.from_user[u][i][..cfg.elements].to_vec();
            let atten = if u == 0 {
                1.0
            } else {
                atten_model.factor(separation_angle(ris, &positions[0], pos)?)?
            };
            cascades.push(ScaledCascade {
                channel: CascadeChannel::new(to_bs, from_user)?,
                atten,
            });
        }
        users.push(UserChannel { direct, cascades });
    }

    let desired = users.remove(0);
    Ok(LinkBudget {
        p_tx: cfg.p_tx_w,
        noise: cfg.noise_w,
        desired,
        interferers: users,
    })
}

/// One strategy's result within a frame.
#[derive(Debug, Clone)]
pub struct MethodOutcome {
    /// The decision exactly as made on the positions the strategy trusted.
    pub decision: ControlDecision,
    /// SINR re-scored on the true evaluation-time geometry.
    pub gamma_true: f64,
    /// Distance between the desired-user position the strategy used and the
    /// true one, meters (zero for strategies that use true positions).
    pub pred_err_m: f64,
}

/// Everything recorded about one frame.
#[derive(Debug, Clone)]
pub struct FrameResult {
    pub frame: usize,
    pub t_decide: f64,
    pub t_eval: f64,
    /// True user positions at the evaluation instant.
    pub true_local: Vec<LocalPoint>,
    /// Predicted positions, when a predictive strategy ran.
    pub predicted_local: Option<Vec<LocalPoint>>,
    /// Decision-time (stale) positions, when the reactive strategy ran.
    pub stale_local: Option<Vec<LocalPoint>>,
    pub outcomes: Vec<MethodOutcome>,
}

/// Run one frame: decide with each strategy on the positions it trusts, then
/// score every decision on the true geometry under the frame's shared fading.
pub fn run_frame(
    scenario: &Scenario,
    frame: usize,
    methods: &[Strategy],
    predictor: &dyn PositionPredictor,
) -> Result<FrameResult> {
    let cfg = &scenario.config;
    if frame >= scenario.frame_count() {
        return Err(Error::Sim(format!(
            "frame {frame} outside coverage ({} frames available)",
            scenario.frame_count()
        )));
    }
    let t_decide = scenario.t_decide(frame);
    let t_eval = scenario.t_eval(frame);
    let steps = cfg.horizon_steps();

    let true_local: Vec<LocalPoint> = scenario
        .users
        .iter()
        .map(|u| u.position_at(t_eval))
        .collect::<Result<_>>()?;

    let fading = draw_fading(scenario, frame);
    let true_budget = make_budget(scenario, &fading, &true_local)?;
    let codebook = build_codebook(cfg.phase_bits)?;

    let mut predicted_local: Option<Vec<LocalPoint>> = None;
    let mut stale_local: Option<Vec<LocalPoint>> = None;

    let mut outcomes = Vec::with_capacity(methods.len());
    for &method in methods {
        let decision = match method {
            Strategy::Tpc => {
                if predicted_local.is_none() {
                    let mut placed = Vec::with_capacity(cfg.users());
                    for (u, user) in scenario.users.iter().enumerate() {
                        let hist_start = frame;
                        let history: Vec<GeoPoint> =
                            user.track.points()[hist_start..hist_start + cfg.in_len].to_vec();
                        let rollout = predictor.predict(u, &history, steps, cfg.dt_s)?;
                        let last = rollout
                            .last()
                            .ok_or_else(|| Error::Sim("empty prediction".into()))?;
                        placed.push(user.place(last).map_err(|e| {
                            Error::Sim(format!("predicted position unusable: {e}"))
                        })?);
                    }
                    predicted_local = Some(placed);
                }
                let budget = make_budget(scenario, &fading, predicted_local.as_ref().unwrap())?;
                tpc_onoff(&budget, &codebook)?
            }
            Strategy::Reactive => {
                if stale_local.is_none() {
                    stale_local = Some(
                        scenario
                            .users
                            .iter()
                            .map(|u| u.position_at(t_decide))
                            .collect::<Result<_>>()?,
                    );
                }
                let budget = make_budget(scenario, &fading, stale_local.as_ref().unwrap())?;
                reactive_onoff(&budget, &codebook)?
            }
            Strategy::AlwaysOn => always_on(&true_budget, &codebook)?,
            Strategy::Oracle => exhaustive_onoff(&true_budget, &codebook)?,
            Strategy::Direct => direct_only(&true_budget)?,
        };

        let gamma_true = ReflectGains::compute(&true_budget, &decision.configs)?.sinr(&decision.v);
        let pred_err_m = match method {
            Strategy::Tpc => predicted_local.as_ref().unwrap()[0].dist(&true_local[0]),
            Strategy::Reactive => stale_local.as_ref().unwrap()[0].dist(&true_local[0]),
            _ => 0.0,
        };
        outcomes.push(MethodOutcome { decision, gamma_true, pred_err_m });
    }

    Ok(FrameResult {
        frame,
        t_decide,
        t_eval,
        true_local,
        predicted_local,
        stale_local,
        outcomes,
    })
}

#[cfg(test)]
mod tests {
    use super::super::tests::demo_tracks;
    use super::super::{build_scenario, ScenarioConfig};
    use super::*;
    use crate::link::sinr;
    use crate::sim::predictors::{LinearPredictor, TruthPredictor};

    fn small_scenario(seed: u64) -> super::super::Scenario {
        let cfg = ScenarioConfig {
            ris_count: 5,
            elements: 32,
            interferers: 3,
            seed,
            ..ScenarioConfig::default()
        };
        build_scenario(&cfg, demo_tracks(seed, 4, 400.0)).unwrap()
    }

    #[test]
    fn fading_is_shared_and_deterministic() {
        let sc = small_scenario(11);
        let a = draw_fading(&sc, 3);
        let b = draw_fading(&sc, 3);
        assert_eq!(a.direct, b.direct);
        assert_eq!(a.to_bs, b.to_bs);
        assert_eq!(a.from_user, b.from_user);
        let c = draw_fading(&sc, 4);
        assert_ne!(a.direct, c.direct);
    }

    #[test]
    fn run_frame_is_reproducible() {
        let sc = small_scenario(7);
        let p = TruthPredictor::from_scenario(&sc);
        let all = Strategy::ALL.to_vec();
        let a = run_frame(&sc, 0, &all, &p).unwrap();
        let b = run_frame(&sc, 0, &all, &p).unwrap();
        for (x, y) in a.outcomes.iter().zip(&b.outcomes) {
            assert_eq!(x.gamma_true.to_bits(), y.gamma_true.to_bits());
            assert_eq!(x.decision.v.states(), y.decision.v.states());
        }
    }

    #[test]
    fn oracle_dominates_every_method_with_perfect_prediction() {
        let sc = small_scenario(13);
        let p = TruthPredictor::from_scenario(&sc);
        for f in 0..10 {
            let r = run_frame(&sc, f, &Strategy::ALL, &p).unwrap();
            let oracle = r
                .outcomes
                .iter()
                .find(|o| o.decision.method == Strategy::Oracle)
                .unwrap()
                .gamma_true;
            for o in &r.outcomes {
                assert!(
                    oracle >= o.gamma_true,
                    "frame {f}: oracle {} below {} ({})",
                    oracle,
                    o.gamma_true,
                    o.decision.method
                );
            }
        }
    }

    #[test]
    fn truth_predictor_makes_tpc_and_true_positions_agree() {
        let sc = small_scenario(3);
        let p = TruthPredictor::from_scenario(&sc);
        let r = run_frame(&sc, 2, &[Strategy::Tpc], &p).unwrap();
        let pred = r.predicted_local.as_ref().unwrap();
        for (a, b) in pred.iter().zip(&r.true_local) {
            assert!(a.dist(b) < 1e-9, "{a:?} vs {b:?}");
        }
        assert_eq!(r.outcomes[0].pred_err_m, 0.0);
    }

    #[test]
    fn scored_gamma_matches_link_sinr_on_true_budget() {
        let sc = small_scenario(5);
        let p = LinearPredictor;
        let r = run_frame(&sc, 1, &Strategy::ALL, &p).unwrap();
        let fading = draw_fading(&sc, 1);
        let budget = make_budget(&sc, &fading, &r.true_local).unwrap();
        for o in &r.outcomes {
            let again = sinr(&budget, &o.decision.v, &o.decision.configs).unwrap();
            assert_eq!(o.gamma_true.to_bits(), again.to_bits(), "{}", o.decision.method);
        }
    }

    #[test]
    fn stationary_users_make_predictive_and_reactive_agree() {
        // no motion: predicted, stale, and true positions coincide, so the
        // two threshold-rule strategies must make identical decisions
        use crate::geom::GeoPoint;
        use crate::trajectory::Trajectory;
        let cfg = ScenarioConfig {
            ris_count: 4,
            elements: 16,
            interferers: 2,
            seed: 8,
            ..ScenarioConfig::default()
        };
        let tracks = (0..3)
            .map(|u| {
                let pts = (0..25)
                    .map(|k| {
                        GeoPoint::new(39.98 + u as f64 * 1e-3, 116.32, k as f64 * 5.0)
                    })
                    .collect();
                (format!("still{u}"), Trajectory::new(pts).unwrap())
            })
            .collect();
        let sc = build_scenario(&cfg, tracks).unwrap();
        let p = TruthPredictor::from_scenario(&sc);
        let r = run_frame(&sc, 0, &[Strategy::Tpc, Strategy::Reactive], &p).unwrap();
        let (tpc, reactive) = (&r.outcomes[0], &r.outcomes[1]);
        assert_eq!(tpc.decision.v.states(), reactive.decision.v.states());
        assert_eq!(tpc.gamma_true.to_bits(), reactive.gamma_true.to_bits());
        assert_eq!(tpc.pred_err_m, 0.0);
        assert_eq!(reactive.pred_err_m, 0.0);
    }

    #[test]
    fn stale_positions_trail_true_ones() {
        let sc = small_scenario(9);
        let r = run_frame(&sc, 4, &[Strategy::Reactive], &LinearPredictor).unwrap();
        let stale = r.stale_local.as_ref().unwrap();
        // walkers move: staleness shows up as a positive position error
        let moved = stale
            .iter()
            .zip(&r.true_local)
            .any(|(a, b)| a.dist(b) > 1.0);
        assert!(moved, "users did not move over the horizon");
        assert!(r.outcomes[0].pred_err_m > 0.0);
    }

    #[test]
    fn out_of_range_frame_is_rejected() {
        let sc = small_scenario(2);
        let n = sc.frame_count();
        assert!(run_frame(&sc, n, &[Strategy::Direct], &LinearPredictor).is_err());
    }
}
