//! Scripted longitudinal (IDM) and lateral (MOBIL) controllers.
//!
//! Surrounding vehicles are driven entirely by these rules; the same pair
//! also serves as the non-learning reference ego policy.

/// Hard physical braking limit applied to every vehicle, in m/s².
pub const HARD_BRAKE: f64 = 10.0;

/// Intelligent-driver-model parameters.
///
/// `b_comf` stores the *magnitude* of the comfortable deceleration: the
/// canonical IDM defines b > 0 so that sqrt(a_max * b) is real.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdmParams {
    /// Maximum acceleration.
    pub a_max: f64,
    /// Acceleration exponent.
    pub delta_exp: f64,
    /// Request (free-flow) speed.
    pub v_r: f64,
    /// Desired time gap, seconds.
    pub t_gap: f64,
    /// Comfortable deceleration magnitude.
    pub b_comf: f64,
    /// Minimum relative distance, meters.
    pub d_0: f64,
}

impl Default for IdmParams {
    fn default() -> Self {
        Self {
            a_max: 6.0,
            delta_exp: 4.0,
            v_r: 30.0,
            t_gap: 1.5,
            b_comf: 5.0,
            d_0: 10.0,
        }
    }
}

impl IdmParams {
    /// Same parameters with a different request speed.
    pub fn with_request_speed(self, v_r: f64) -> Self {
        Self { v_r, ..self }
    }
}

/// What a follower sees of its leading vehicle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeaderView {
    /// Bumper-to-bumper interval to the leader, >= 0.
    pub gap: f64,
    /// Follower speed minus leader speed.
    pub closing_speed: f64,
}

/// MOBIL lane-change parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MobilParams {
    /// Maximum deceleration imposed on the new follower.
    pub b_safe: f64,
    /// Politeness coefficient.
    pub p: f64,
    /// Lane-change decision threshold.
    pub a_th: f64,
}

impl Default for MobilParams {
    fn default() -> Self {
        Self { b_safe: 2.0, p: 0.001, a_th: 0.2 }
    }
}

/// IDM accelerations of every affected party before and after a
/// hypothetical lane change of the subject vehicle.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LaneChangeContext {
    pub subject_before: f64,
    pub subject_after: f64,
    pub new_follower_before: f64,
    pub new_follower_after: f64,
    pub old_follower_before: f64,
    pub old_follower_after: f64,
}

/// Direction of a lane change relative to the driving direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LaneChange {
    Left,
    Right,
}

/// Desired separation distance for the current speed and closing speed.
///
/// The dynamic part is floored at zero so the result never drops below d_0.
pub fn desired_gap(v: f64, closing_speed: f64, params: &IdmParams) -> f64 {
    let dynamic =
        params.t_gap * v + v * closing_speed / (2.0 * (params.a_max * params.b_comf).sqrt());
    params.d_0 + dynamic.max(0.0)
}

/// Longitudinal IDM acceleration, clamped to [-HARD_BRAKE, a_max].
///
/// With no leader the interaction term vanishes. A degenerate zero gap
/// returns the hard braking limit, signalling imminent contact.
pub fn idm_accel(v: f64, leader: Option<LeaderView>, params: &IdmParams) -> f64 {
    let free = 1.0 - (v / params.v_r).powf(params.delta_exp);
    let interaction = match leader {
        None => 0.0,
        Some(l) => {
            if l.gap <= 0.0 {
                return -HARD_BRAKE;
            }
            let d_r = desired_gap(v, l.closing_speed, params);
            (d_r / l.gap).powi(2)
        }
    };
    (params.a_max * (free - interaction)).clamp(-HARD_BRAKE, params.a_max)
}

/// MOBIL decision: change lanes iff the new follower keeps a tolerable
/// deceleration and the acceleration gain clears the threshold.
pub fn mobil_decide(ctx: &LaneChangeContext, params: &MobilParams) -> bool {
    let safe = ctx.new_follower_after >= -params.b_safe;
    let incentive = ctx.subject_after - ctx.subject_before
        + params.p
            * ((ctx.new_follower_after - ctx.new_follower_before)
                + (ctx.old_follower_after - ctx.old_follower_before));
    safe && incentive > params.a_th
}

/// Pick the first adjacent lane that passes MOBIL, left evaluated first.
pub fn scripted_lane_choice(
    left: Option<&LaneChangeContext>,
    right: Option<&LaneChangeContext>,
    params: &MobilParams,
) -> Option<LaneChange> {
    if let Some(ctx) = left {
        if mobil_decide(ctx, params) {
            return Some(LaneChange::Left);
        }
    }
    if let Some(ctx) = right {
        if mobil_decide(ctx, params) {
            return Some(LaneChange::Right);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn desired_gap_at_standstill_is_minimum_distance() {
        let p = IdmParams::default();
        assert_eq!(desired_gap(0.0, 0.0, &p), 10.0);
    }

    #[test]
    fn desired_gap_linear_term() {
        let p = IdmParams::default();
        assert_abs_diff_eq!(desired_gap(25.0, 0.0, &p), 47.5, epsilon = 1e-12);
    }

    #[test]
    fn desired_gap_floors_dynamic_term() {
        let p = IdmParams::default();
        // Rapidly opening gap: the dynamic term would be strongly negative.
        assert_eq!(desired_gap(20.0, -100.0, &p), 10.0);
    }

    #[test]
    fn free_flow_equilibrium() {
        let p = IdmParams::default().with_request_speed(25.0);
        assert_abs_diff_eq!(idm_accel(25.0, None, &p), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn both_ratio_terms_at_one_gives_full_braking() {
        let p = IdmParams::default();
        let v = p.v_r;
        let gap = desired_gap(v, 0.0, &p);
        let a = idm_accel(v, Some(LeaderView { gap, closing_speed: 0.0 }), &p);
        assert_abs_diff_eq!(a, -p.a_max, epsilon = 1e-12);
    }

    #[test]
    fn idm_worked_example() {
        let p = IdmParams::default();
        let a = idm_accel(20.0, Some(LeaderView { gap: 100.0, closing_speed: 0.0 }), &p);
        // d_r = 40, a = 6 * (1 - (2/3)^4 - 0.16)
        assert_abs_diff_eq!(a, 6.0 * (1.0 - (2.0f64 / 3.0).powi(4) - 0.16), epsilon = 1e-12);
        assert_abs_diff_eq!(a, 3.8548, epsilon = 1e-4);
    }

    #[test]
    fn zero_gap_returns_hard_brake() {
        let p = IdmParams::default();
        let a = idm_accel(10.0, Some(LeaderView { gap: 0.0, closing_speed: 5.0 }), &p);
        assert_eq!(a, -HARD_BRAKE);
    }

    #[test]
    fn mobil_safety_veto_dominates() {
        let p = MobilParams::default();
        let ctx = LaneChangeContext {
            subject_before: 0.0,
            subject_after: 5.0, // huge incentive
            new_follower_after: -3.0,
            ..Default::default()
        };
        assert!(!mobil_decide(&ctx, &p));
    }

    #[test]
    fn mobil_clear_incentive() {
        let p = MobilParams::default();
        let ctx = LaneChangeContext {
            subject_before: 0.0,
            subject_after: 0.5,
            ..Default::default()
        };
        assert!(mobil_decide(&ctx, &p));
    }

    #[test]
    fn mobil_indifference_declines() {
        let p = MobilParams::default();
        let ctx = LaneChangeContext {
            subject_before: 1.0,
            subject_after: 1.0,
            new_follower_before: -0.5,
            new_follower_after: -0.5,
            old_follower_before: 0.3,
            old_follower_after: 0.3,
        };
        assert!(!mobil_decide(&ctx, &p));
    }

    #[test]
    fn lane_choice_prefers_left() {
        let p = MobilParams::default();
        let good = LaneChangeContext { subject_after: 1.0, ..Default::default() };
        assert_eq!(
            scripted_lane_choice(Some(&good), Some(&good), &p),
            Some(LaneChange::Left)
        );
        assert_eq!(scripted_lane_choice(None, Some(&good), &p), Some(LaneChange::Right));
        assert_eq!(scripted_lane_choice(None, None, &p), None);
    }

    #[test]
    fn platoon_gap_converges_to_fixed_point() {
        // Follower behind a constant 25 m/s leader: the equilibrium gap is
        // d_r(25, 0) / sqrt(1 - (25/30)^4) ~= 66.0 m.
        let p = IdmParams::default();
        let dt = 0.05;
        let v_lead = 25.0;
        let mut gap = 100.0;
        let mut v = 20.0;
        for _ in 0..(120.0 / dt) as usize {
            let a = idm_accel(v, Some(LeaderView { gap, closing_speed: v - v_lead }), &p);
            gap += (v_lead - v) * dt;
            v = (v + a * dt).max(0.0);
        }
        let expected = desired_gap(v_lead, 0.0, &p) / (1.0 - (v_lead / p.v_r).powi(4)).sqrt();
        assert_abs_diff_eq!(expected, 66.0, epsilon = 0.05);
        assert!((gap - expected).abs() / expected < 0.01, "gap {gap} vs {expected}");
    }

    proptest! {
        #[test]
        fn idm_non_increasing_in_speed(
            gap in 5.0f64..300.0,
            closing in -10.0f64..10.0,
            v in 0.0f64..29.0,
            dv in 0.01f64..1.0,
        ) {
            let p = IdmParams::default();
            let leader = LeaderView { gap, closing_speed: closing };
            let a_low = idm_accel(v, Some(leader), &p);
            let a_high = idm_accel(v + dv, Some(leader), &p);
            prop_assert!(a_high <= a_low + 1e-12);
        }

        #[test]
        fn idm_non_decreasing_in_gap(
            gap in 5.0f64..300.0,
            extra in 0.1f64..100.0,
            closing in -10.0f64..10.0,
            v in 0.0f64..30.0,
        ) {
            let p = IdmParams::default();
            let a_near = idm_accel(v, Some(LeaderView { gap, closing_speed: closing }), &p);
            let a_far = idm_accel(v, Some(LeaderView { gap: gap + extra, closing_speed: closing }), &p);
            prop_assert!(a_far >= a_near - 1e-12);
        }

        #[test]
        fn idm_bounded_above_and_positive_below_request_speed(v in 0.0f64..29.99) {
            let p = IdmParams::default();
            let a = idm_accel(v, None, &p);
            prop_assert!(a <= p.a_max);
            prop_assert!(a > 0.0);
        }

        #[test]
        fn mobil_incentive_depends_only_on_differences(
            base in -5.0f64..5.0,
            subject_gain in -1.0f64..1.0,
            nf_delta in -1.0f64..1.0,
            of_delta in -1.0f64..1.0,
            shift in -3.0f64..3.0,
        ) {
            let p = MobilParams::default();
            let ctx = LaneChangeContext {
                subject_before: base,
                subject_after: base + subject_gain,
                new_follower_before: base,
                new_follower_after: base + nf_delta,
                old_follower_before: base,
                old_follower_after: base + of_delta,
            };
            let shifted = LaneChangeContext {
                subject_before: ctx.subject_before + shift,
                subject_after: ctx.subject_after + shift,
                new_follower_before: ctx.new_follower_before + shift,
                new_follower_after: ctx.new_follower_after + shift,
                old_follower_before: ctx.old_follower_before + shift,
                old_follower_after: ctx.old_follower_after + shift,
            };
            // Shifting every acceleration moves the safety check but not the
            // incentive; compare decisions with the safety veto disarmed.
            let lenient = MobilParams { b_safe: 1e9, ..p };
            prop_assert_eq!(mobil_decide(&ctx, &lenient), mobil_decide(&shifted, &lenient));
        }

        #[test]
        fn mobil_safety_veto_for_any_incentive(
            incentive in -10.0f64..10.0,
            nf_after in -10.0f64..-2.0001,
        ) {
            let p = MobilParams::default();
            let ctx = LaneChangeContext {
                subject_before: 0.0,
                subject_after: incentive,
                new_follower_after: nf_after,
                ..Default::default()
            };
            prop_assert!(!mobil_decide(&ctx, &p));
        }
    }
}
