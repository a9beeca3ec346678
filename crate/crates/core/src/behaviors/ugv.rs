//! Behaviors of the ground rescue vehicles.

use super::events::*;
use super::uav::step_toward;
use super::{BehaviorOutput, BehaviorSpec, TickCtx};
use crate::fsm::{BehaviorFault, BehaviorType, Value, DONE_EVENT};
use crate::TargetId;

pub(super) fn specs() -> Vec<BehaviorSpec> {
    vec![
        BehaviorSpec {
            name: "moveToTarget",
            behavior_type: BehaviorType::HardwareFunction,
            run: move_to_target,
        },
        BehaviorSpec {
            name: "returnHome",
            behavior_type: BehaviorType::HardwareFunction,
            run: return_home,
        },
    ]
}

/// Drive toward the believed target position (kept fresh on the blackboard by
/// the tracker's update events). Within one patch length after the move, the
/// target counts as reached and the rescue is announced.
fn move_to_target(ctx: &mut TickCtx) -> Result<BehaviorOutput, BehaviorFault> {
    let target = match ctx.bb_int(KEY_TARGET_ID) {
        Some(t) if t >= 0 => t as TargetId,
        _ => {
            return Err(BehaviorFault {
                behavior: "moveToTarget".into(),
                message: "no targetId on blackboard".into(),
            })
        }
    };
    let goal = ctx.bb_pos(KEY_POSITION).ok_or_else(|| BehaviorFault {
        behavior: "moveToTarget".into(),
        message: "no position on blackboard".into(),
    })?;
    let next = step_toward(ctx.position, goal, ctx.speed);
    let mut out = BehaviorOutput::default();
    out.motion.position = Some(next);
    if next.dist(goal) < 1.0 {
        out.emit(
            TARGET_RESCUED,
            vec![(KEY_TARGET_ID.into(), Value::Int(target as i64))],
        );
    }
    Ok(out)
}

/// Drive back to the spawn position; arrival completes the state and the
/// rover becomes assignable again.
fn return_home(ctx: &mut TickCtx) -> Result<BehaviorOutput, BehaviorFault> {
    let mut out = BehaviorOutput::default();
    if ctx.position.dist(ctx.home) <= ctx.speed {
        out.motion.position = Some(ctx.home);
        out.emit(DONE_EVENT, vec![]);
    } else {
        out.motion.position = Some(step_toward(ctx.position, ctx.home, ctx.speed));
    }
    Ok(out)
}
