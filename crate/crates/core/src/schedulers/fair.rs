use super::{ScheduleDecision, SchedulerState};
use crate::fabric::{PortCapacities, RateAllocation};
use crate::EPS;

/// Per-flow max-min fair rates by progressive filling.
///
/// All unfrozen flows grow at the same pace; when a port saturates, every
/// flow crossing it freezes at its current rate.
pub fn fair_schedule(state: &SchedulerState<'_>) -> ScheduleDecision {
    let flows: Vec<_> = state.jobs().iter().flat_map(|j| j.all_demands()).collect();
    let machines = state.fabric.num_machines();
    let mut residual = PortCapacities::full(&state.fabric);
    let mut rates = vec![0.0; flows.len()];
    let mut frozen = vec![false; flows.len()];

    loop {
        let mut egress_users = vec![0usize; machines];
        let mut ingress_users = vec![0usize; machines];
        for (i, f) in flows.iter().enumerate() {
            if !frozen[i] {
                egress_users[f.src] += 1;
                ingress_users[f.dst] += 1;
            }
        }
        let step = (0..machines)
            .flat_map(|m| {
                [
                    (egress_users[m] > 0).then(|| residual.egress(m) / egress_users[m] as f64),
                    (ingress_users[m] > 0).then(|| residual.ingress(m) / ingress_users[m] as f64),
                ]
            })
            .flatten()
            .fold(f64::INFINITY, f64::min);
        if !step.is_finite() {
            break;
        }
        for (i, f) in flows.iter().enumerate() {
            if !frozen[i] {
                rates[i] += step;
                residual.consume(f.src, f.dst, step);
            }
        }
        for (i, f) in flows.iter().enumerate() {
            if !frozen[i] && (residual.egress(f.src) <= EPS || residual.ingress(f.dst) <= EPS) {
                frozen[i] = true;
            }
        }
    }

    let allocation: RateAllocation = flows.iter().zip(rates).map(|(f, r)| (f.key, r)).collect();
    ScheduleDecision {
        allocation,
        ..Default::default()
    }
}
