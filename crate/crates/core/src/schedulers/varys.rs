use std::collections::BTreeMap;

use super::{backfill, madd_rates, FlowDemand, JobState, ScheduleDecision, SchedulerState};
use crate::fabric::{PortCapacities, PortId, RateAllocation};
use crate::model::JobId;

/// Effective bottleneck of a coflow: the time its most loaded port needs at
/// full capacity.
pub fn coflow_bottleneck(demands: &[FlowDemand], port_capacity: f64) -> f64 {
    let mut bytes: BTreeMap<PortId, f64> = BTreeMap::new();
    for d in demands {
        *bytes.entry(PortId::egress(d.src)).or_insert(0.0) += d.remaining;
        *bytes.entry(PortId::ingress(d.dst)).or_insert(0.0) += d.remaining;
    }
    bytes.values().fold(0.0, |acc, &b| acc.max(b / port_capacity))
}

/// Coflow baseline: each job's flows form one coflow. Coflows are served
/// smallest effective bottleneck first, each with a MADD allocation, and
/// leftover capacity is then backfilled in the same order.
pub fn varys_schedule(state: &SchedulerState<'_>) -> ScheduleDecision {
    let mut coflows: Vec<(&JobState<'_>, Vec<FlowDemand>, f64)> = state
        .jobs()
        .iter()
        .filter(|j| j.released)
        .map(|j| {
            let demands = j.all_demands();
            let bottleneck = coflow_bottleneck(&demands, state.fabric.port_capacity());
            (j, demands, bottleneck)
        })
        .filter(|(_, d, _)| !d.is_empty())
        .collect();
    coflows.sort_by(|a, b| {
        a.2.total_cmp(&b.2)
            .then(a.0.dag.release_time().total_cmp(&b.0.dag.release_time()))
            .then(a.0.dag.job().cmp(&b.0.dag.job()))
    });

    let mut residual = PortCapacities::full(&state.fabric);
    let mut allocation = RateAllocation::new();
    let mut order: Vec<(JobId, f64)> = Vec::with_capacity(coflows.len());
    for (job, demands, bottleneck) in &coflows {
        order.push((job.dag.job(), *bottleneck));
        let outcome = madd_rates(demands, &residual);
        if outcome.is_blocked() {
            continue;
        }
        for d in demands {
            residual.consume(d.src, d.dst, outcome.allocation.rate(d.key));
        }
        allocation.absorb(outcome.allocation);
    }

    let groups: Vec<Vec<FlowDemand>> = coflows.into_iter().map(|(_, d, _)| d).collect();
    backfill(&mut allocation, &mut residual, &groups);

    ScheduleDecision {
        allocation,
        ordered_metaflows: Vec::new(),
        ordered_coflows: order,
    }
}
