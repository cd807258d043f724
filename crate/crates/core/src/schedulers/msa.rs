use super::{active_gains, backfill, madd_rates, sort_metaflows, ScheduleDecision, SchedulerState};
use crate::fabric::{PortCapacities, RateAllocation};

/// Metaflow scheduling round: rank every active metaflow by gain, then give
/// each a MADD allocation out of whatever capacity the higher-ranked ones
/// left. Metaflows that find a needed port exhausted get nothing this round.
pub fn msa_schedule(state: &SchedulerState<'_>, work_conserving: bool) -> ScheduleDecision {
    let ranked = sort_metaflows(active_gains(state));
    let mut residual = PortCapacities::full(&state.fabric);
    let mut allocation = RateAllocation::new();
    let mut considered = Vec::with_capacity(ranked.len());
    let mut groups = Vec::new();

    for entry in ranked {
        if residual.exhausted() {
            break;
        }
        let job = state.job(entry.key.job).expect("ranked metaflow has a job");
        let demands = job.demands(entry.key.metaflow);
        let outcome = madd_rates(&demands, &residual);
        if !outcome.is_blocked() {
            for d in &demands {
                residual.consume(d.src, d.dst, outcome.allocation.rate(d.key));
            }
            allocation.absorb(outcome.allocation);
        }
        considered.push(entry);
        if work_conserving {
            groups.push(demands);
        }
    }

    if work_conserving {
        backfill(&mut allocation, &mut residual, &groups);
    }

    ScheduleDecision {
        allocation,
        ordered_metaflows: considered,
        ordered_coflows: Vec::new(),
    }
}
