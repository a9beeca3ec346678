//! Behaviors of the aerial search vehicles.
//!
//! These encode the search-and-rescue division of labor: `coverage` roams and
//! announces unknown targets, `selectRover` claims a ground rover for a find
//! (backing off when a lower-id agent announced first), `tracking` follows
//! the target and keeps its position fresh on the bus, `localCoverage`
//! respirals around the last known position after losing it.

use super::events::*;
use super::{BehaviorOutput, BehaviorSpec, RoverView, TableOp, TickCtx};
use crate::fsm::{BehaviorFault, BehaviorType, Value, DONE_EVENT};
use crate::geom::{in_bounds, Vec2};
use crate::{CpsId, Point, Scalar, TargetId};
use rand::Rng;
use std::f64::consts::TAU;

pub(super) fn specs() -> Vec<BehaviorSpec> {
    use BehaviorType::*;
    vec![
        BehaviorSpec {
            name: "idle",
            behavior_type: HardwareFunction,
            run: idle,
        },
        BehaviorSpec {
            name: "takeOff",
            behavior_type: HardwareFunction,
            run: take_off,
        },
        BehaviorSpec {
            name: "loitering",
            behavior_type: HardwareFunction,
            run: idle,
        },
        BehaviorSpec {
            name: "missionAbort",
            behavior_type: HardwareFunction,
            run: mission_abort,
        },
        BehaviorSpec {
            name: "coverage",
            behavior_type: SwarmBehavior,
            run: coverage,
        },
        BehaviorSpec {
            name: "tracking",
            behavior_type: SwarmBehavior,
            run: tracking,
        },
        BehaviorSpec {
            name: "localCoverage",
            behavior_type: SwarmBehavior,
            run: local_coverage,
        },
        BehaviorSpec {
            name: "selectRover",
            behavior_type: SwarmFunction,
            run: select_rover_behavior,
        },
        BehaviorSpec {
            name: "targetMonitoring",
            behavior_type: SwarmFunction,
            run: target_monitoring,
        },
    ]
}

fn idle(_ctx: &mut TickCtx) -> Result<BehaviorOutput, BehaviorFault> {
    Ok(BehaviorOutput::default())
}

/// Climb one altitude unit per tick until the configured altitude is reached,
/// then signal completion.
fn take_off(ctx: &mut TickCtx) -> Result<BehaviorOutput, BehaviorFault> {
    let target = ctx.real_setting(KEY_ALTITUDE, 2.0);
    let mut out = BehaviorOutput::default();
    let next = (ctx.altitude + 1.0).min(target);
    out.motion.altitude = Some(next);
    if next >= target {
        out.emit(DONE_EVENT, vec![]);
    }
    Ok(out)
}

/// Descend one altitude unit per tick; completion on touchdown drives the
/// machine into its terminal state.
fn mission_abort(ctx: &mut TickCtx) -> Result<BehaviorOutput, BehaviorFault> {
    let mut out = BehaviorOutput::default();
    let next = (ctx.altitude - 1.0).max(0.0);
    out.motion.altitude = Some(next);
    if next <= 0.0 {
        out.emit(DONE_EVENT, vec![]);
    }
    Ok(out)
}

/// Straight-line random walk: keep the current heading until the next step
/// would leave the world, then draw fresh headings until one stays inside.
/// Announces at most one unknown target per tick, seen from the post-move
/// position.
fn coverage(ctx: &mut TickCtx) -> Result<BehaviorOutput, BehaviorFault> {
    let w = ctx.world.width as Scalar;
    let h = ctx.world.height as Scalar;
    let mut heading = ctx.heading;
    let mut next = ctx.position.add(Vec2::from_heading(heading).scale(ctx.speed));
    if !in_bounds(next, w, h) {
        let mut ok = false;
        for _ in 0..64 {
            heading = ctx.rng.gen_range(0.0..TAU);
            next = ctx.position.add(Vec2::from_heading(heading).scale(ctx.speed));
            if in_bounds(next, w, h) {
                ok = true;
                break;
            }
        }
        if !ok {
            // Worst case (speed larger than the free space around a corner):
            // head for the middle of the world.
            let center = Point::new(w / 2.0, h / 2.0);
            next = step_toward(ctx.position, center, ctx.speed);
            heading = ctx.heading;
        }
    }
    let mut out = BehaviorOutput::default();
    out.motion.position = Some(next);
    out.motion.heading = Some(heading);
    announce_unknown(ctx, next, &mut out);
    Ok(out)
}

/// Announce the lowest-id target that is visible from `at` and absent from
/// the local knowledge table.
fn announce_unknown(ctx: &TickCtx, at: Point, out: &mut BehaviorOutput) {
    let mut best: Option<(TargetId, Point)> = None;
    for (id, pos) in ctx.world.visible_from(at) {
        if ctx.table.contains_key(&id) {
            continue;
        }
        if best.map_or(true, |(b, _)| id < b) {
            best = Some((id, pos));
        }
    }
    if let Some((id, pos)) = best {
        out.emit(
            TARGET_FOUND,
            vec![
                (KEY_TARGET_ID.into(), Value::Int(id as i64)),
                (KEY_POSITION.into(), Value::Pos(pos)),
                (KEY_FINDER.into(), Value::Int(ctx.owner as i64)),
            ],
        );
    }
}

/// Follow the target on the blackboard. While it stays in view: chase it and
/// broadcast a position update whenever it changes patch (the update's echo
/// re-enters the state and refreshes the blackboard). Out of view: report it
/// lost with the last known position.
fn tracking(ctx: &mut TickCtx) -> Result<BehaviorOutput, BehaviorFault> {
    let target = required_target(ctx, "tracking")?;
    let believed = ctx.bb_pos(KEY_POSITION);
    let mut out = BehaviorOutput::default();
    let seen = ctx
        .world
        .visible_from(ctx.position)
        .find(|(id, _)| *id == target);
    match seen {
        Some((_, actual)) => {
            if believed.map(|p| p.patch()) != Some(actual.patch()) {
                out.emit(
                    TARGET_UPDATE,
                    vec![
                        (KEY_TARGET_ID.into(), Value::Int(target as i64)),
                        (KEY_POSITION.into(), Value::Pos(actual)),
                    ],
                );
            }
            out.motion.position = Some(step_toward(ctx.position, actual, ctx.speed));
        }
        None => {
            let last = believed.unwrap_or(ctx.position);
            out.emit(
                TARGET_LOST,
                vec![
                    (KEY_TARGET_ID.into(), Value::Int(target as i64)),
                    (KEY_LAST_POSITION.into(), Value::Pos(last)),
                ],
            );
        }
    }
    Ok(out)
}

/// Archimedean spiral (one patch between windings) growing out of the last
/// known target position, using the large-angle arc-length approximation
/// L ~ a*theta^2/2. Completion once the radius passes the `localRadius`
/// setting.
fn local_coverage(ctx: &mut TickCtx) -> Result<BehaviorOutput, BehaviorFault> {
    let center = ctx.bb_pos(KEY_LAST_POSITION).unwrap_or(ctx.position);
    let r_max = ctx.real_setting("localRadius", 5.0);
    let arc = ctx.speed * ctx.ticks_in_state as Scalar;
    let theta = (4.0 * std::f64::consts::PI * arc).sqrt();
    let r = theta / TAU;
    let mut out = BehaviorOutput::default();
    if r >= r_max {
        out.emit(DONE_EVENT, vec![]);
        return Ok(out);
    }
    let w = ctx.world.width as Scalar;
    let h = ctx.world.height as Scalar;
    let pos = clamp_in(
        center.add(Vec2::new(r * theta.cos(), r * theta.sin())),
        w,
        h,
    );
    out.motion.position = Some(pos);
    announce_unknown(ctx, pos, &mut out);
    Ok(out)
}

/// Claim a ground rover for the target on the blackboard. Backs off (and
/// returns to coverage) when someone else has the better claim: an
/// announcement by a lower id this tick, or a table entry naming another
/// finder, an assignment, or a rescue. Waits silently while no rover is idle.
fn select_rover_behavior(ctx: &mut TickCtx) -> Result<BehaviorOutput, BehaviorFault> {
    let target = required_target(ctx, "selectRover")?;
    let mut out = BehaviorOutput::default();
    if claim_beaten(ctx, target) {
        out.emit(DONE_EVENT, vec![]);
        return Ok(out);
    }
    let position = ctx.bb_pos(KEY_POSITION).ok_or_else(|| BehaviorFault {
        behavior: "selectRover".into(),
        message: "no position on blackboard".into(),
    })?;
    if let Some(rover) = select_rover(position, ctx.rovers) {
        out.emit(
            TARGET_ASSIGNED,
            vec![
                (KEY_TARGET_ID.into(), Value::Int(target as i64)),
                (KEY_UGV_ID.into(), Value::Int(rover as i64)),
                (KEY_POSITION.into(), Value::Pos(position)),
                (KEY_FINDER.into(), Value::Int(ctx.owner as i64)),
            ],
        );
    }
    Ok(out)
}

fn claim_beaten(ctx: &TickCtx, target: TargetId) -> bool {
    use super::TargetKnowledge::*;
    for ev in ctx.inbox {
        let about_target = ev.value(KEY_TARGET_ID).and_then(Value::as_int)
            == Some(target as i64);
        if !about_target {
            continue;
        }
        match ev.name.as_str() {
            TARGET_FOUND => {
                if let Some(finder) = ev.value(KEY_FINDER).and_then(Value::as_int) {
                    if (finder as CpsId) < ctx.owner {
                        return true;
                    }
                }
            }
            TARGET_ASSIGNED => {
                if ev.value(KEY_FINDER).and_then(Value::as_int) != Some(ctx.owner as i64) {
                    return true;
                }
            }
            TARGET_RESCUED => return true,
            _ => {}
        }
    }
    match ctx.table.get(&target) {
        Some(Detected { finder }) => *finder != ctx.owner,
        Some(Assigned) | Some(Rescued) => true,
        None => false,
    }
}

/// Cheapest idle rover by Euclidean distance to the target; ties break to the
/// lowest id. `None` when no rover is idle — the caller retries next tick.
pub fn select_rover(target: Point, rovers: &[RoverView]) -> Option<CpsId> {
    rovers
        .iter()
        .filter(|r| r.idle)
        .map(|r| (r.position.dist(target), r.id))
        .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)))
        .map(|(_, id)| id)
}

/// Maintain the local target table from everything heard this tick. Pure
/// bookkeeping: the edits apply after the step so all behaviors in a tick see
/// one consistent table.
fn target_monitoring(ctx: &mut TickCtx) -> Result<BehaviorOutput, BehaviorFault> {
    let mut out = BehaviorOutput::default();
    for ev in ctx.inbox {
        let target = match ev.value(KEY_TARGET_ID).and_then(Value::as_int) {
            Some(t) if t >= 0 => t as TargetId,
            _ => continue,
        };
        match ev.name.as_str() {
            TARGET_FOUND => {
                if let Some(finder) = ev.value(KEY_FINDER).and_then(Value::as_int) {
                    out.table_ops.push(TableOp::Detected {
                        target,
                        finder: finder as CpsId,
                    });
                }
            }
            TARGET_ASSIGNED => out.table_ops.push(TableOp::Assigned { target }),
            TARGET_RESCUED => out.table_ops.push(TableOp::Rescued { target }),
            TARGET_LOST => out.table_ops.push(TableOp::Evict { target }),
            _ => {}
        }
    }
    Ok(out)
}

fn required_target(ctx: &TickCtx, behavior: &str) -> Result<TargetId, BehaviorFault> {
    match ctx.bb_int(KEY_TARGET_ID) {
        Some(t) if t >= 0 => Ok(t as TargetId),
        _ => Err(BehaviorFault {
            behavior: behavior.into(),
            message: "no targetId on blackboard".into(),
        }),
    }
}

/// One step of at most `speed` from `from` toward `to`; lands exactly on `to`
/// when it is within reach.
pub fn step_toward(from: Point, to: Point, speed: Scalar) -> Point {
    let d = from.dist(to);
    if d <= speed {
        to
    } else {
        from.add(to.sub(from).scale(speed / d))
    }
}

/// Clamp into the world rectangle (positions live in [0, w) x [0, h)).
pub fn clamp_in(p: Point, width: Scalar, height: Scalar) -> Point {
    Point::new(
        p.x.clamp(0.0, width - 1e-9),
        p.y.clamp(0.0, height - 1e-9),
    )
}

#[cfg(test)]
mod tests {
    use super::super::testutil::CtxFixture;
    use super::super::{RoverView, TableOp, TargetKnowledge};
    use super::*;
    use crate::geom::in_bounds;

    fn run(fx: &mut CtxFixture, f: super::super::BehaviorFn) -> BehaviorOutput {
        let mut ctx = fx.ctx();
        f(&mut ctx).unwrap()
    }

    #[test]
    fn takeoff_climbs_one_unit_per_tick_then_completes() {
        let mut fx = CtxFixture::new();
        let out = run(&mut fx, take_off);
        assert_eq!(out.motion.altitude, Some(1.0));
        assert!(out.emissions.is_empty());
        fx.altitude = 1.0;
        let out = run(&mut fx, take_off);
        assert_eq!(out.motion.altitude, Some(2.0));
        assert_eq!(out.emissions[0].name, DONE_EVENT);
    }

    #[test]
    fn takeoff_honors_blackboard_altitude() {
        let mut fx = CtxFixture::new();
        fx.bb(KEY_ALTITUDE, Value::Real(3.0));
        fx.altitude = 2.0;
        let out = run(&mut fx, take_off);
        assert_eq!(out.motion.altitude, Some(3.0));
        assert_eq!(out.emissions[0].name, DONE_EVENT);
    }

    #[test]
    fn abort_descends_to_ground_then_completes() {
        let mut fx = CtxFixture::new();
        fx.altitude = 2.0;
        let out = run(&mut fx, mission_abort);
        assert_eq!(out.motion.altitude, Some(1.0));
        assert!(out.emissions.is_empty());
        fx.altitude = 1.0;
        let out = run(&mut fx, mission_abort);
        assert_eq!(out.motion.altitude, Some(0.0));
        assert_eq!(out.emissions[0].name, DONE_EVENT);
    }

    #[test]
    fn coverage_keeps_heading_away_from_walls() {
        let mut fx = CtxFixture::new();
        let out = run(&mut fx, coverage);
        assert_eq!(out.motion.position, Some(Point::new(11.5, 10.5)));
        assert_eq!(out.motion.heading, Some(0.0));
        assert!(out.emissions.is_empty());
    }

    #[test]
    fn coverage_resamples_heading_at_the_wall() {
        let mut fx = CtxFixture::new();
        fx.position = Point::new(0.2, 10.5);
        fx.heading = std::f64::consts::PI; // due west, straight out of the world
        let out = run(&mut fx, coverage);
        let pos = out.motion.position.unwrap();
        assert!(in_bounds(pos, 21.0, 21.0));
        let heading = out.motion.heading.unwrap();
        assert!(heading != std::f64::consts::PI);
        assert!((0.0..TAU).contains(&heading));
    }

    #[test]
    fn coverage_announces_lowest_unknown_target_after_moving() {
        let mut fx = CtxFixture::new();
        // Post-move position is (11.5, 10.5); both targets are in view there.
        fx.targets = vec![(9, Point::new(11.5, 11.5)), (4, Point::new(12.5, 10.5))];
        fx.table.insert(9, TargetKnowledge::Detected { finder: 3 });
        let out = run(&mut fx, coverage);
        assert_eq!(out.emissions.len(), 1);
        let ev = &out.emissions[0];
        assert_eq!(ev.name, TARGET_FOUND);
        assert_eq!(
            ev.payload,
            vec![
                (KEY_TARGET_ID.to_string(), Value::Int(4)),
                (KEY_POSITION.to_string(), Value::Pos(Point::new(12.5, 10.5))),
                (KEY_FINDER.to_string(), Value::Int(1)),
            ]
        );
        assert!(out.table_ops.is_empty(), "tables change only via monitoring");
    }

    #[test]
    fn coverage_is_silent_when_everything_in_view_is_known() {
        let mut fx = CtxFixture::new();
        fx.targets = vec![(4, Point::new(12.5, 10.5))];
        fx.table.insert(4, TargetKnowledge::Assigned);
        let out = run(&mut fx, coverage);
        assert!(out.emissions.is_empty());
    }

    #[test]
    fn tracking_chases_and_updates_on_patch_change() {
        let mut fx = CtxFixture::new();
        fx.position = Point::new(12.5, 10.5);
        fx.bb(KEY_TARGET_ID, Value::Int(3));
        fx.bb(KEY_POSITION, Value::Pos(Point::new(12.5, 10.5)));
        fx.targets = vec![(3, Point::new(13.5, 10.5))];
        let out = run(&mut fx, tracking);
        assert_eq!(out.emissions.len(), 1);
        assert_eq!(out.emissions[0].name, TARGET_UPDATE);
        assert_eq!(
            out.emissions[0].payload[1],
            (KEY_POSITION.to_string(), Value::Pos(Point::new(13.5, 10.5)))
        );
        assert_eq!(out.motion.position, Some(Point::new(13.5, 10.5)));
    }

    #[test]
    fn tracking_stays_quiet_within_the_same_patch() {
        let mut fx = CtxFixture::new();
        fx.position = Point::new(12.5, 10.5);
        fx.bb(KEY_TARGET_ID, Value::Int(3));
        fx.bb(KEY_POSITION, Value::Pos(Point::new(13.2, 10.5)));
        fx.targets = vec![(3, Point::new(13.5, 10.5))];
        let out = run(&mut fx, tracking);
        assert!(out.emissions.is_empty());
        assert_eq!(out.motion.position, Some(Point::new(13.5, 10.5)));
    }

    #[test]
    fn tracking_reports_loss_with_last_known_position() {
        let mut fx = CtxFixture::new();
        fx.position = Point::new(12.5, 10.5);
        fx.bb(KEY_TARGET_ID, Value::Int(3));
        fx.bb(KEY_POSITION, Value::Pos(Point::new(13.5, 10.5)));
        fx.targets = vec![(3, Point::new(16.5, 10.5))]; // four patches away
        let out = run(&mut fx, tracking);
        assert_eq!(out.emissions.len(), 1);
        let ev = &out.emissions[0];
        assert_eq!(ev.name, TARGET_LOST);
        assert_eq!(
            ev.payload,
            vec![
                (KEY_TARGET_ID.to_string(), Value::Int(3)),
                (KEY_LAST_POSITION.to_string(), Value::Pos(Point::new(13.5, 10.5))),
            ]
        );
        assert_eq!(out.motion.position, None);
    }

    #[test]
    fn tracking_without_target_id_faults() {
        let mut fx = CtxFixture::new();
        let mut ctx = fx.ctx();
        assert!(tracking(&mut ctx).is_err());
    }

    #[test]
    fn local_coverage_spirals_outward_and_completes() {
        let mut fx = CtxFixture::new();
        let center = Point::new(10.5, 10.5);
        fx.bb(KEY_LAST_POSITION, Value::Pos(center));
        let mut last_r = -1.0;
        for k in 0..79 {
            fx.ticks_in_state = k;
            let out = run(&mut fx, local_coverage);
            assert!(out.emissions.is_empty(), "done too early at {k}");
            let pos = out.motion.position.unwrap();
            assert!(in_bounds(pos, 21.0, 21.0));
            let r = pos.dist(center);
            assert!(r >= last_r - 1e-9, "radius shrank at {k}");
            assert!(r <= 5.0 + 1e-9);
            last_r = r;
        }
        fx.ticks_in_state = 79; // r = sqrt(79/pi) >= 5
        let out = run(&mut fx, local_coverage);
        assert_eq!(out.emissions[0].name, DONE_EVENT);
        assert_eq!(out.motion.position, None);
    }

    #[test]
    fn local_coverage_honors_radius_setting() {
        let mut fx = CtxFixture::new();
        fx.bb(KEY_LAST_POSITION, Value::Pos(Point::new(10.5, 10.5)));
        fx.params.insert("localRadius".into(), Value::Real(2.0));
        fx.ticks_in_state = 13; // r = sqrt(13/pi) >= 2
        let out = run(&mut fx, local_coverage);
        assert_eq!(out.emissions[0].name, DONE_EVENT);
    }

    #[test]
    fn local_coverage_announces_like_coverage() {
        let mut fx = CtxFixture::new();
        fx.bb(KEY_LAST_POSITION, Value::Pos(Point::new(10.5, 10.5)));
        fx.ticks_in_state = 1;
        fx.targets = vec![(6, Point::new(10.5, 11.5))];
        let out = run(&mut fx, local_coverage);
        assert_eq!(out.emissions.len(), 1);
        assert_eq!(out.emissions[0].name, TARGET_FOUND);
    }

    #[test]
    fn select_rover_picks_cheapest_idle_with_id_tiebreak() {
        let target = Point::new(3.5, 3.5);
        let rovers = vec![
            RoverView { id: 11, position: Point::new(5.0, 5.0), idle: true },
            RoverView { id: 12, position: Point::new(3.0, 3.0), idle: true },
            RoverView { id: 13, position: Point::new(3.5, 3.5), idle: false },
        ];
        assert_eq!(select_rover(target, &rovers), Some(12));
        let tied = vec![
            RoverView { id: 22, position: Point::new(3.5, 5.5), idle: true },
            RoverView { id: 21, position: Point::new(3.5, 1.5), idle: true },
        ];
        assert_eq!(select_rover(target, &tied), Some(21));
        assert_eq!(select_rover(target, &[]), None);
        let busy = vec![RoverView { id: 11, position: target, idle: false }];
        assert_eq!(select_rover(target, &busy), None);
    }

    #[test]
    fn select_rover_behavior_assigns_the_claimed_target() {
        let mut fx = CtxFixture::new();
        fx.bb(KEY_TARGET_ID, Value::Int(5));
        fx.bb(KEY_POSITION, Value::Pos(Point::new(12.5, 10.5)));
        fx.rovers = vec![RoverView { id: 11, position: Point::new(10.5, 0.5), idle: true }];
        let out = run(&mut fx, select_rover_behavior);
        assert_eq!(out.emissions.len(), 1);
        let ev = &out.emissions[0];
        assert_eq!(ev.name, TARGET_ASSIGNED);
        assert_eq!(
            ev.payload,
            vec![
                (KEY_TARGET_ID.to_string(), Value::Int(5)),
                (KEY_UGV_ID.to_string(), Value::Int(11)),
                (KEY_POSITION.to_string(), Value::Pos(Point::new(12.5, 10.5))),
                (KEY_FINDER.to_string(), Value::Int(1)),
            ]
        );
    }

    #[test]
    fn select_rover_behavior_waits_while_rover_is_busy() {
        let mut fx = CtxFixture::new();
        fx.bb(KEY_TARGET_ID, Value::Int(5));
        fx.bb(KEY_POSITION, Value::Pos(Point::new(12.5, 10.5)));
        fx.rovers = vec![RoverView { id: 11, position: Point::new(10.5, 0.5), idle: false }];
        let out = run(&mut fx, select_rover_behavior);
        assert!(out.emissions.is_empty());
    }

    #[test]
    fn select_rover_backs_off_for_a_lower_id_announcer() {
        let mut fx = CtxFixture::new();
        fx.owner = 2;
        fx.bb(KEY_TARGET_ID, Value::Int(5));
        fx.bb(KEY_POSITION, Value::Pos(Point::new(12.5, 10.5)));
        fx.rovers = vec![RoverView { id: 12, position: Point::new(10.5, 0.5), idle: true }];
        fx.hear(
            TARGET_FOUND,
            1,
            vec![
                (KEY_TARGET_ID, Value::Int(5)),
                (KEY_POSITION, Value::Pos(Point::new(12.5, 10.5))),
                (KEY_FINDER, Value::Int(1)),
            ],
        );
        let out = run(&mut fx, select_rover_behavior);
        assert_eq!(out.emissions.len(), 1);
        assert_eq!(out.emissions[0].name, DONE_EVENT);
    }

    #[test]
    fn select_rover_ignores_announcements_about_other_targets() {
        let mut fx = CtxFixture::new();
        fx.owner = 2;
        fx.bb(KEY_TARGET_ID, Value::Int(5));
        fx.bb(KEY_POSITION, Value::Pos(Point::new(12.5, 10.5)));
        fx.rovers = vec![RoverView { id: 12, position: Point::new(10.5, 0.5), idle: true }];
        fx.hear(
            TARGET_FOUND,
            1,
            vec![(KEY_TARGET_ID, Value::Int(8)), (KEY_FINDER, Value::Int(1))],
        );
        let out = run(&mut fx, select_rover_behavior);
        assert_eq!(out.emissions[0].name, TARGET_ASSIGNED);
    }

    #[test]
    fn select_rover_backs_off_when_the_table_names_another_finder() {
        let mut fx = CtxFixture::new();
        fx.bb(KEY_TARGET_ID, Value::Int(5));
        fx.bb(KEY_POSITION, Value::Pos(Point::new(12.5, 10.5)));
        fx.rovers = vec![RoverView { id: 11, position: Point::new(10.5, 0.5), idle: true }];
        fx.table.insert(5, TargetKnowledge::Detected { finder: 9 });
        let out = run(&mut fx, select_rover_behavior);
        assert_eq!(out.emissions[0].name, DONE_EVENT);
        fx.table.insert(5, TargetKnowledge::Rescued);
        let out = run(&mut fx, select_rover_behavior);
        assert_eq!(out.emissions[0].name, DONE_EVENT);
        // Its own claim in the table is no reason to back off.
        fx.table.insert(5, TargetKnowledge::Detected { finder: 1 });
        let out = run(&mut fx, select_rover_behavior);
        assert_eq!(out.emissions[0].name, TARGET_ASSIGNED);
    }

    #[test]
    fn monitoring_translates_events_into_table_ops() {
        let mut fx = CtxFixture::new();
        fx.hear(
            TARGET_FOUND,
            2,
            vec![(KEY_TARGET_ID, Value::Int(1)), (KEY_FINDER, Value::Int(2))],
        );
        fx.hear(TARGET_ASSIGNED, 2, vec![(KEY_TARGET_ID, Value::Int(1))]);
        fx.hear(TARGET_RESCUED, 12, vec![(KEY_TARGET_ID, Value::Int(2))]);
        fx.hear(TARGET_LOST, 3, vec![(KEY_TARGET_ID, Value::Int(3))]);
        fx.hear(LAUNCH, 0, vec![]);
        let out = run(&mut fx, target_monitoring);
        assert_eq!(
            out.table_ops,
            vec![
                TableOp::Detected { target: 1, finder: 2 },
                TableOp::Assigned { target: 1 },
                TableOp::Rescued { target: 2 },
                TableOp::Evict { target: 3 },
            ]
        );
        assert!(out.emissions.is_empty() && out.writes.is_empty());
    }

    #[test]
    fn step_toward_caps_at_speed_and_lands_exactly() {
        let from = Point::new(0.0, 0.0);
        let far = step_toward(from, Point::new(10.0, 0.0), 1.0);
        assert!((far.x - 1.0).abs() < 1e-12 && far.y == 0.0);
        let near = step_toward(from, Point::new(0.3, 0.4), 1.0);
        assert_eq!(near, Point::new(0.3, 0.4));
    }

    #[test]
    fn clamp_keeps_positions_inside_the_world() {
        let p = clamp_in(Point::new(-3.0, 25.0), 21.0, 21.0);
        assert!(in_bounds(p, 21.0, 21.0));
        assert_eq!(p.x, 0.0);
    }
}
